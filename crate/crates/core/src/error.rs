use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("truncation level must be at least 1 and p^N must fit in 62 bits")]
    BadPrecision,
    #[error("elements live in different rings")]
    RingMismatch,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("unsupported root system type: {0}")]
    UnsupportedType(String),
    #[error("index {0} out of range")]
    BadIndex(i64),
    #[error("root is the highest root")]
    HighestRoot,
    #[error("roots are equal or opposite")]
    OppositeRoots,
    #[error("certification failed: {0}")]
    CertificationFailure(String),
    #[error("the identity has no finite valuation at this precision")]
    IdentityElement,
    #[error("precision exceeded: {0}")]
    PrecisionExceeded(String),
    #[error("element leaves the Iwahori subgroup at this precision: {0}")]
    NotFactorizable(String),
    #[error("p-valuation axiom violated: {0}")]
    AxiomViolation(String),
    #[error("cannot combine reduced and unreduced elements")]
    MixedReduction,
    #[error("operation requires an unreduced element")]
    ReducedInput,
    #[error("bracket mismatch: {0}")]
    Mismatch(String),
    #[error("generation failed, unreached symbol {0}")]
    GenerationFailure(String),
    #[error("commutative quotient mismatch: {0}")]
    QuotientMismatch(String),
    #[error("group of order {order} exceeds the cap {cap}")]
    GroupTooLarge { order: usize, cap: usize },
    #[error("property violated: {0}")]
    PropertyViolation(String),
    #[error("membership failed: {0}")]
    MembershipFailure(String),
    #[error("p = {p} is not admissible: need p > h + 1 = {bound}")]
    InadmissiblePrime { p: u64, bound: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
