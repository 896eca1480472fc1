use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}: column `{column}`: {message}")]
    Schema {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{file}: duplicate row for date {date} ({key})")]
    DuplicateDate {
        file: String,
        date: NaiveDate,
        key: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("date alignment: {0}")]
    Alignment(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("yield solver failed for trade {trade_id}: {reason}")]
    YieldSolver { trade_id: String, reason: String },

    #[error("no treasury available on {date} to match trade {trade_id}")]
    NoMatchingTreasury { trade_id: String, date: NaiveDate },

    #[error("duration {duration} cannot be bracketed by the treasury universe [{lo}, {hi}]{}", on_date(.date))]
    Unbracketable {
        duration: f64,
        lo: f64,
        hi: f64,
        date: Option<NaiveDate>,
    },

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("degenerate canonical direction: fund weight {0:e} is numerically zero")]
    DegenerateDirection(f64),

    #[error("{date}: {source}")]
    OnDate {
        date: NaiveDate,
        #[source]
        source: Box<Error>,
    },
}

fn on_date(date: &Option<NaiveDate>) -> String {
    match date {
        Some(d) => format!(" on {d}"),
        None => String::new(),
    }
}

impl Error {
    pub fn at(self, date: NaiveDate) -> Error {
        match self {
            e @ Error::OnDate { .. } => e,
            e => Error::OnDate {
                date,
                source: Box::new(e),
            },
        }
    }

    /// Input problems (bad files, bad configuration) as opposed to numerical
    /// failures inside the pipeline.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Schema { .. }
            | Error::DuplicateDate { .. }
            | Error::Io { .. }
            | Error::Alignment(_)
            | Error::InvalidInput(_)
            | Error::InsufficientHistory(_) => true,
            Error::OnDate { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
