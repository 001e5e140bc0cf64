pub mod chevalley;
pub mod enveloping;
pub mod error;
pub mod graded;
pub mod group_algebra;
pub mod iwahori;
pub mod linalg;
pub mod padic;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use padic::{teichmuller, teichmuller_lift, Residue, RingSpec, TruncatedUnramified, Valuation};
pub use roots::{CartanType, Cocharacters, Family, HeightClass, RootId, RootSystem};
pub use chevalley::{certify_constants, ChevalleyLie, CommutatorTerm, StructureConstants};
pub use iwahori::{check_p_valuation_axioms, AxiomReport, Grade, IwahoriElement, Matrix, Omega, Verdict};
pub use graded::{certify_brackets_against_oracle, GradedLie, GradedLieElement, OracleModel, OracleReport, Symbol};
pub use enveloping::{Enveloping, GeneratorCertificate, PbwElement, QuotientReport};
pub use linalg::Echelon;
pub use group_algebra::{AugmentationLadder, FiniteGroup, IwahoriQuotient, DEFAULT_GROUP_CAP};
pub use verify::{gk_bounds, run_verify, GkSummary, Status, VerificationReport, VerifyOptions};
