//! Python bindings: load diagram bundles, build the unified transition
//! system, check CTL properties, and emit NuSMV source, all in-process.
//!
//! ```python
//! import uml2ts_py as u
//! bundle = u.Bundle.from_files(["atm_sd.ubd", "atm_smd.ubd", "atm_ad.ubd"])
//! model = bundle.unify()
//! verdict = model.check("AG (!(State = Bad-Bad-Bad))")
//! print(verdict.satisfied, model.stats())
//! ```

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use uml2ts_core::check;
use uml2ts_core::ctl;
use uml2ts_core::diagram::{collect_guards, validate, DiagramBundle};
use uml2ts_core::pipeline::build_unified;
use uml2ts_core::smv::{emit_smv, EmitOptions};
use uml2ts_core::ubd;
use uml2ts_core::UnifiedTs;

fn value_error(message: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(message.to_string())
}

/// The parsed diagrams of one scenario.
#[pyclass]
struct Bundle {
    inner: DiagramBundle,
}

#[pymethods]
impl Bundle {
    /// Load 2 or 3 `.ubd` files; the sequence diagram is mandatory.
    #[staticmethod]
    fn from_files(paths: Vec<String>) -> PyResult<Self> {
        let inner = ubd::load_bundle(&paths).map_err(|e| match e {
            ubd::LoadError::Io { .. } => PyIOError::new_err(e.to_string()),
            other => value_error(other),
        })?;
        Ok(Bundle { inner })
    }

    /// Assemble a bundle from in-memory diagram texts.
    #[staticmethod]
    fn from_texts(texts: Vec<String>) -> PyResult<Self> {
        if texts.len() < 2 || texts.len() > 3 {
            return Err(value_error("a bundle needs 2 or 3 diagram texts"));
        }
        let mut sd = None;
        let mut smd = None;
        let mut ad = None;
        for (i, text) in texts.iter().enumerate() {
            let name = format!("<text {}>", i + 1);
            match ubd::parse_diagram_named(text, &name).map_err(value_error)? {
                ubd::Diagram::Sequence(d) if sd.is_none() => sd = Some(d),
                ubd::Diagram::StateMachine(d) if smd.is_none() => smd = Some(d),
                ubd::Diagram::Activity(d) if ad.is_none() => ad = Some(d),
                dup => {
                    return Err(value_error(format!(
                        "two {} diagrams given; at most one of each kind",
                        dup.kind_name()
                    )))
                }
            }
        }
        let Some(sd) = sd else {
            return Err(value_error("sequence diagram is mandatory"));
        };
        Ok(Bundle {
            inner: DiagramBundle { sd, smd, ad },
        })
    }

    /// Structural violations as strings; an empty list means valid.
    fn validate(&self) -> Vec<String> {
        validate(&self.inner)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    /// Guard names in first-occurrence order.
    fn guards(&self) -> Vec<String> {
        collect_guards(&self.inner)
            .iter()
            .map(|g| g.to_string())
            .collect()
    }

    /// Merge the diagrams into the unified transition system.
    fn unify(&self) -> PyResult<UnifiedModel> {
        let uts = build_unified(&self.inner)
            .map_err(|report| value_error(format!("validation failed:\n{report}")))?;
        Ok(UnifiedModel { uts })
    }
}

/// One property verdict, with its counterexample when extraction succeeded.
#[pyclass]
struct Verdict {
    #[pyo3(get)]
    satisfied: bool,
    #[pyo3(get)]
    formula: String,
    /// State names along the counterexample, in order.
    #[pyo3(get)]
    trace: Option<Vec<String>>,
    /// Index into `trace` where the lasso begins, when the violation loops.
    #[pyo3(get)]
    loop_start: Option<usize>,
    #[pyo3(get)]
    trace_unsupported: bool,
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict(satisfied={}, formula={:?})",
            self.satisfied, self.formula
        )
    }
}

/// The merged transition system.
#[pyclass]
struct UnifiedModel {
    uts: UnifiedTs,
}

#[pymethods]
impl UnifiedModel {
    #[getter]
    fn state_count(&self) -> usize {
        self.uts.states.len()
    }

    #[getter]
    fn transition_count(&self) -> usize {
        self.uts.transitions.len()
    }

    /// `(declared, reachable)` state-space statistics.
    fn stats(&self) -> (usize, usize) {
        self.uts.reachable_stats()
    }

    /// Distinct rendered state names in BFS order.
    fn state_names(&self) -> Vec<String> {
        self.uts.bfs_names()
    }

    /// The sorted debug dump, as written by `uml2ts build`.
    fn dump(&self) -> String {
        self.uts.dump()
    }

    /// Check one CTL formula against the initial state.
    fn check(&self, formula: &str) -> PyResult<Verdict> {
        let f = ctl::parse_ctl(formula).map_err(value_error)?;
        let verdict = check::check(&self.uts, &f).map_err(value_error)?;
        Ok(Verdict {
            satisfied: verdict.satisfied,
            formula: ctl::render_ctl(&verdict.formula),
            trace: verdict.trace.as_ref().map(|t| {
                t.prefix
                    .iter()
                    .map(|&i| self.uts.render_state(i))
                    .collect()
            }),
            loop_start: verdict.trace.as_ref().and_then(|t| t.loop_start),
            trace_unsupported: verdict.trace_unsupported,
        })
    }

    /// NuSMV source for this system with one CTLSPEC per property.
    #[pyo3(signature = (props = Vec::new(), paper_style = false))]
    fn to_smv(&self, props: Vec<String>, paper_style: bool) -> PyResult<String> {
        let formulas: Vec<ctl::Formula> = props
            .iter()
            .enumerate()
            .map(|(i, p)| ctl::parse_ctl(p).map_err(|e| value_error(format!("property {}: {e}", i + 1))))
            .collect::<PyResult<_>>()?;
        Ok(emit_smv(&self.uts, &formulas, EmitOptions { paper_style }))
    }
}

/// Parse a CTL formula and return its canonical rendering.
#[pyfunction]
fn parse_ctl(text: &str) -> PyResult<String> {
    let f = ctl::parse_ctl(text).map_err(value_error)?;
    Ok(ctl::render_ctl(&f))
}

/// Instantiate a specification pattern; returns the CTL text.
#[pyfunction]
#[pyo3(signature = (pattern, scope, p, q = None, r = None, s = None))]
fn instantiate_pattern(
    pattern: &str,
    scope: &str,
    p: &str,
    q: Option<String>,
    r: Option<String>,
    s: Option<String>,
) -> PyResult<String> {
    let parse_opt = |text: Option<String>| -> PyResult<Option<ctl::Formula>> {
        text.map(|t| ctl::parse_ctl(&t).map_err(value_error)).transpose()
    };
    let spec = ctl::PatternSpec {
        pattern: pattern.parse().map_err(value_error)?,
        scope: scope.parse().map_err(value_error)?,
        p: ctl::parse_ctl(p).map_err(value_error)?,
        q: parse_opt(q)?,
        r: parse_opt(r)?,
        s: parse_opt(s)?,
    };
    let f = ctl::instantiate_pattern(&spec).map_err(value_error)?;
    Ok(ctl::render_ctl(&f))
}

#[pymodule]
fn uml2ts_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Bundle>()?;
    m.add_class::<UnifiedModel>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(parse_ctl, m)?)?;
    m.add_function(wrap_pyfunction!(instantiate_pattern, m)?)?;
    Ok(())
}
