//! Curve builders and deterministic CSV/JSON serialization.
//!
//! All CSV floats use a fixed 17-significant-digit scientific format with
//! `.` as the decimal separator and `\n` newlines, so identical runs emit
//! bit-identical files. Rows follow lexicographic mode-number order.

use serde::Serialize;

use crate::bogoliubov::{spectrum_beta, wavevector_norm, BogoliubovError, DispersionCurve, DispersionPoint};
use crate::config::VariantFlags;
use crate::geometry::{transverse_box, LatticeVector, PhysicalParams};
use crate::pairseries::PairSeriesState;
use crate::potential::FourierTable;
use crate::variational::{build_block_limit, eigen_block, MatrixVariant, VariationalError};

/// 17 significant digits, scientific, locale-independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Running-series dispersion over the transverse grid, one row per lattice
/// vector excluding the zero mode.
pub fn bogoliubov_curve(
    table: &FourierTable,
    flow_n1: i32,
    cutoff: i32,
) -> Result<DispersionCurve, BogoliubovError> {
    let flow = LatticeVector::longitudinal(flow_n1);
    let mut points = Vec::new();
    for l in transverse_box(cutoff) {
        if l.is_zero() {
            continue;
        }
        let lambda = spectrum_beta(flow, l, table)?;
        points.push(DispersionPoint {
            n: l,
            k_abs: wavevector_norm(l, &table.params),
            lambda,
            selected: true,
            complex: false,
        });
    }
    Ok(DispersionCurve { points })
}

#[derive(Debug)]
pub enum CurveError {
    Bogoliubov(BogoliubovError),
    Variational(VariationalError),
}

impl std::fmt::Display for CurveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveError::Bogoliubov(e) => write!(f, "{e}"),
            CurveError::Variational(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CurveError {}

/// Transverse-series dispersion at `(flow, k2)` over the transverse grid,
/// excluding `l = -k2`.
///
/// The `lambda` column is the smallest selected real branch of each block
/// (the binding excitation); `complex` marks blocks with complex branches.
/// At `k2 = 0` the spectrum reduces exactly to the running series and the
/// rows are produced by the same kernel, so the file is bit-identical to a
/// running-series export.
pub fn transverse_curve(
    table: &FourierTable,
    k2: LatticeVector,
    flow_n1: i32,
    cutoff: i32,
    variant: MatrixVariant,
) -> Result<DispersionCurve, CurveError> {
    if k2.is_zero() && variant == MatrixVariant::Corrected {
        return bogoliubov_curve(table, flow_n1, cutoff).map_err(CurveError::Bogoliubov);
    }
    let p = &table.params;
    let v0 = table.v0_limit;
    let flow = LatticeVector::longitudinal(flow_n1);
    let mut points = Vec::new();
    for l in transverse_box(cutoff) {
        if l == -k2 {
            continue;
        }
        let block = build_block_limit(flow, k2, l, v0, p, variant).map_err(CurveError::Variational)?;
        let branches = eigen_block(&block, p).map_err(CurveError::Variational)?;
        let has_complex = branches.iter().any(|b| b.complex && !b.spurious);
        let selected_real: Option<f64> = branches
            .iter()
            .filter(|b| b.selected && !b.complex)
            .map(|b| b.lambda.re)
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        let (lambda, selected) = match selected_real {
            Some(v) => (v, true),
            None => {
                // fall back to the series-1 positive branch for visibility
                let fallback = branches
                    .iter()
                    .find(|b| b.series == 1 && b.sign == 1)
                    .map(|b| b.lambda.re)
                    .unwrap_or(f64::NAN);
                (fallback, false)
            }
        };
        points.push(DispersionPoint {
            n: l,
            k_abs: wavevector_norm(l, p),
            lambda,
            selected,
            complex: has_complex,
        });
    }
    Ok(DispersionCurve { points })
}

pub fn dispersion_csv(curve: &DispersionCurve) -> String {
    let mut out = String::from("n1,n2,n3,k_abs,lambda,selected,complex\n");
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.n.n1,
            p.n.n2,
            p.n.n3,
            fmt_float(p.k_abs),
            fmt_float(p.lambda),
            p.selected,
            p.complex
        ));
    }
    out
}

pub fn phi_csv(state: &PairSeriesState) -> String {
    let mut out = String::from("n1,n2,n3,re_phi,im_phi,complex\n");
    for (l, phi) in &state.phi {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            l.n1,
            l.n2,
            l.n3,
            fmt_float(phi.value.re),
            fmt_float(phi.value.im),
            phi.complex_branch
        ));
    }
    out
}

pub fn fourier_csv(table: &FourierTable) -> String {
    let mut out = String::from("n1,n2,n3,v_q\n");
    for (q, v) in table.entries() {
        out.push_str(&format!("{},{},{},{}\n", q.n1, q.n2, q.n3, fmt_float(*v)));
    }
    out
}

/// Envelope wrapping every JSON report with the config hash and the
/// variant flags in effect.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope<T: Serialize> {
    pub config_hash: String,
    pub variants: VariantFlags,
    pub payload: T,
}

pub fn to_json<T: Serialize>(envelope: &ReportEnvelope<T>) -> String {
    let mut s = serde_json::to_string_pretty(envelope).expect("report serializes");
    s.push('\n');
    s
}

pub fn params_of(table: &FourierTable) -> &PhysicalParams {
    &table.params
}
