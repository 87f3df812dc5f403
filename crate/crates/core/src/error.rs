use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("mission duration {duration_s} s is shorter than the minimum flight time {t_min_s:.3} s")]
    DurationTooShort { duration_s: f64, t_min_s: f64 },

    #[error("finish cell unreachable: {required} stages needed, {available} available (deficit {})", required - available)]
    Unreachable { required: usize, available: usize },

    #[error("search space of {size} action sequences exceeds the bound {bound}")]
    SearchSpaceExceeded { size: u128, bound: u128 },

    #[error("position ({x:.3}, {y:.3}) m lies outside the flight area")]
    OutsideFlightArea { x: f64, y: f64 },

    #[error("interference set is empty; SIR is undefined")]
    NoInterference,

    #[error("scenario has no macro base station")]
    NoBaseStation,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("UAV altitude {0} m outside the backhaul model range [22.5, 300] m")]
    AltitudeOutOfRange(f64),

    #[error("degenerate direction: transmitter and receiver coincide")]
    DegenerateGeometry,

    #[error("realization {index} (seed {seed}): {source}")]
    Realization {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
