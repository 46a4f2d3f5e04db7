//! End-to-end construction: validate a bundle, build the component systems,
//! and merge them.

use std::sync::Arc;

use crate::builders::{ad_to_ts, sd_to_ts, smd_to_ts};
use crate::diagram::{collect_guards, validate, DiagramBundle, ValidationReport};
use crate::ts::{ComponentTs, GuardDomain, UnifiedTs};
use crate::unify::unify;

/// The component systems of one bundle, before merging.
pub struct Components {
    pub domain: Arc<GuardDomain>,
    pub sd: ComponentTs,
    pub smd: Option<ComponentTs>,
    pub ad: Option<ComponentTs>,
}

/// Validates the bundle and builds its component systems. Returns the
/// validation report on any violation.
pub fn build_components(bundle: &DiagramBundle) -> Result<Components, ValidationReport> {
    let report = validate(bundle);
    if !report.is_valid() {
        return Err(report);
    }
    let guards = collect_guards(bundle);
    let domain = GuardDomain::new(guards.clone());
    Ok(Components {
        domain,
        sd: sd_to_ts(&bundle.sd, &guards),
        smd: bundle.smd.as_ref().map(|d| smd_to_ts(d, &guards)),
        ad: bundle.ad.as_ref().map(|d| ad_to_ts(d, &guards)),
    })
}

/// Full pipeline: bundle to unified transition system.
pub fn build_unified(bundle: &DiagramBundle) -> Result<UnifiedTs, ValidationReport> {
    let c = build_components(bundle)?;
    Ok(unify(&c.sd, c.smd.as_ref(), c.ad.as_ref(), c.domain))
}
