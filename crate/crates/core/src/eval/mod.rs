//! Evaluation protocols.

mod edges;
mod order;
mod recall;
mod region;

pub use edges::{
    default_tolerance, edge_benchmark, edge_prf, human_edge_consistency, thin, CurvePoint, EdgeBenchConfig,
    EdgeBenchImage, EdgeBenchReport, EdgeCounts, SoftMap,
};
pub use order::{
    depth_order_accuracy, DepthRankOrderer, Negated, OrderEvalReport, OrderInput, OrderPrediction, Orderer,
    PairVerdictOrderer, Verdict,
};
pub use recall::{average_recall, iou_thresholds, ARReport, GtSegment, Stratum, StratumCounts, MAX_PROPOSALS};
pub use region::{match_regions, region_consistency, ConsistencyMode, Matching, PairScore, Prf};

/// `num / den`, or 1 when there is nothing to measure.
pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}
