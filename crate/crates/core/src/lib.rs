//! Verification toolchain for UML behavioral diagrams.
//!
//! The pipeline takes up to three behavioral views of one scenario: a
//! mandatory sequence diagram, a behavioral state machine, and an activity
//! diagram. It merges them into a single finite transition system and checks
//! CTL properties against it with an embedded explicit-state model checker.
//! The unified system can also be exported as NuSMV source for
//! cross-validation with an external checker.
//!
//! Modules, in pipeline order:
//!
//! * [`diagram`]: the three diagram metamodels, structural validation, and
//!   guard collection.
//! * [`ubd`]: parser and serializer for the line-oriented `.ubd` diagram
//!   format.
//! * [`ts`]: shared transition-system model: labels, ternary guard
//!   valuations, component and unified transition systems.
//! * [`builders`]: one transition-system builder per diagram kind.
//! * [`unify`]: the product construction merging component systems into the
//!   unified one.
//! * [`ctl`]: CTL formula AST, concrete-syntax parser/renderer, and
//!   specification-pattern instantiation.
//! * [`check`]: fixpoint-labeling CTL checker with counterexample traces.
//! * [`smv`]: NuSMV source emission plus a grammar checker for the emitted
//!   subset.
//! * [`nusmv`]: optional cross-validation against an external NuSMV binary.

pub mod builders;
pub mod check;
pub mod ctl;
pub mod diagram;
pub mod nusmv;
pub mod pipeline;
pub mod smv;
pub mod ts;
pub mod ubd;
pub mod unify;

pub use diagram::{
    collect_guards, validate, ActivityDiagram, DiagramBundle, GuardLiteral, GuardName,
    SequenceDiagram, StateMachineDiagram, ValidationReport,
};
pub use ts::{ComponentTs, GuardDomain, GuardValue, Label, UnifiedState, UnifiedTs, Valuation};
