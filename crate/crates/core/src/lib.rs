//! Scenario engine for mockup prototyping: captures interaction event
//! sequences on raster mockups, replays them deterministically and exports
//! the replay as video.

pub mod fixture;
pub mod model;
pub mod raster;
pub mod replay;
pub mod store;
pub mod video;
