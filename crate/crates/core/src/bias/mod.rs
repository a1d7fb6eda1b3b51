//! Bias diagnostics and the two data-level interventions: the positivity
//! flip on popular items and the per-item percentile transformation.

mod diagnostics;
mod flip;
mod percentile;
mod segment;

pub use diagnostics::{diagnose, BiasDiagnostics, ItemStat};
pub use flip::{flip_positivity, flipped_item_count};
pub use percentile::{percentile_of, percentile_transform, profile_report, ProfileSummary};
pub use segment::{popularity_order, segment_head_tail, ItemSegmentation};
