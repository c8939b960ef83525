//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A potential constraint failed; names the invariant and the grid point.
    #[error("potential constraint `{invariant}` violated at x = {x}: {detail}")]
    ConstraintViolation {
        invariant: &'static str,
        x: f64,
        detail: String,
    },

    #[error("energy {energy} is degenerate with a critical value {critical} of the potential")]
    DegenerateEnergy { energy: f64, critical: f64 },

    #[error("integration step {step} exceeds h/20 = {max} (oscillation scale unresolved)")]
    StepTooLarge { step: f64, max: f64 },

    #[error("eigenvalue {value} lies within {tol} of the search window edge")]
    WindowBoundary { value: f64, tol: f64 },

    #[error("no eigenvalue found in window ({lo}, {hi})")]
    NoEigenvalue { lo: f64, hi: f64 },

    #[error("two Dirichlet eigenvalues within {gap:.3e} of each other near {near} (collision)")]
    EigenvalueCollision { near: f64, gap: f64 },

    #[error("empty integration interval [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },

    #[error("turning point too close: E - V margin {margin} < {required} on the WKB interval")]
    TurningPointProximity { margin: f64, required: f64 },

    #[error("Jost Wronskian degenerate: |W| = {magnitude:.3e} relative to scale (near a resonance)")]
    WronskianDegenerate { magnitude: f64 },

    #[error("power iteration did not converge after {iters} iterations (rel change {rel:.3e})")]
    PowerIterationDiverged { iters: usize, rel: f64 },

    #[error("Newton iteration for the resonance did not converge after {iters} steps")]
    NewtonDiverged { iters: usize },

    #[error("contour passes within {dist:.3e} of a zero; retries exhausted")]
    ContourThroughZero { dist: f64 },

    #[error("{count} zeros inside the simplicity contour; expected exactly one")]
    MultipleZerosInContour { count: i64 },

    #[error("resonance width below the double-precision resolution floor ({floor:.1e})")]
    WidthUnresolvable { floor: f64 },

    #[error("quasimode residual norm does not decrease with h across the sweep")]
    ResidualNotDecreasing,

    #[error("radiation condition invalid at X_max: E - V_eff = {margin} < {required}")]
    RadiationConditionInvalid { margin: f64, required: f64 },

    #[error("config error in field `{field}`: {detail}")]
    Config { field: String, detail: String },

    #[error("expression `{expr}` not in the potential grammar (poly(c0,c1,...) | harmonic_well | linear_ramp | zero)")]
    ExpressionGrammar { expr: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
