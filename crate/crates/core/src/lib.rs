//! Soiling estimation from paired lux sensors, panel-image dust scoring,
//! detection evaluation and a seeded environment simulator.

pub mod detection;
pub mod imaging;
pub mod sim;
pub mod soiling;

pub use detection::{iou_components, BoundingBox, Detection, LabeledBox, MatchReport};
pub use imaging::{ImageDustClass, PixelReport, RasterImage};
pub use soiling::{BlockagePoint, DailySummary, DustLevel, LuxReading, Mode, Role};
pub use sim::{SimScenario, SimOutput};
