use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrlabError {
    #[error("column dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported field degree {0} (supported: 1..=8)")]
    FieldDegree(u8),

    #[error("value {value:#b} does not fit in GF(2^{degree})")]
    FieldValue { value: u16, degree: u8 },

    #[error("field degree mismatch: {left} vs {right}")]
    FieldDegreeMismatch { left: u8, right: u8 },

    #[error("zero has no multiplicative inverse")]
    FieldZeroInverse,

    #[error("topology error: {0}")]
    Topology(String),

    #[error("expression parse error: {0}")]
    ExprParse(String),

    #[error("protocol file error: {0}")]
    ProtocolFile(String),

    #[error("protocol is invalid: {0}")]
    InvalidProtocol(String),

    #[error("wiretap member references unknown edge `{0}`")]
    UnknownWiretapEdge(String),

    #[error("oracle refused: {vars} fundamental variables exceed the bound {bound}")]
    OracleBound { vars: usize, bound: usize },

    #[error("oracle distribution is not dyadic; mutual information is irrational")]
    NonDyadic,

    #[error("hash parameter error: {0}")]
    HashParams(String),

    #[error("transform error: {0}")]
    Transform(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
