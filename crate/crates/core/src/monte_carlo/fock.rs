use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("Fock cutoff {given} is below the {required} levels needed to hold 1 - 1e-10 of the thermal population")]
    InsufficientCutoff { given: usize, required: usize },
    #[error("invalid {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Smallest N with Σ_{n<N} p_n ≥ 1 − 10⁻¹⁰ for a thermal state of mean n̄.
pub fn required_fock_cutoff(nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    let q = nbar / (nbar + 1.0);
    // Tail mass beyond N is q^N.
    (1e-10f64.ln() / q.ln()).ceil().max(1.0) as usize
}

/// Row-major `dim × dim` matrix ⟨m|D(α)|n⟩ of the displacement operator.
///
/// Column 0 is the coherent state; further columns follow from
/// D|n+1⟩ = (a† − α*)D|n⟩/√(n+1). Every entry with m, n < dim is exact,
/// the truncation only limits which entries are computed.
fn displacement_matrix(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..dim {
        d[m * dim] = c;
        c = c * alpha / ((m + 1) as f64).sqrt();
    }
    let ac = alpha.conj();
    for n in 0..dim - 1 {
        let inv = 1.0 / ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let up = if m > 0 { d[(m - 1) * dim + n] * (m as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
            d[m * dim + n + 1] = (up - ac * d[m * dim + n]) * inv;
        }
    }
    d
}

/// Motional coherence of one thermal mode between the two time bins,
/// evaluated as Σ_n p_n ⟨n|D(−iη)·D(iη·e^(−iωτ))|n⟩ in a truncated Fock basis
/// and returned with the sign convention where the zero-point phase is
/// +η²·sin ωτ. Its modulus reproduces exp[−η²(2n̄+1)(1 − cos ωτ)].
pub fn motional_coherence_fock(
    eta: f64,
    freq_hz: f64,
    nbar: f64,
    tau_s: f64,
    fock_cutoff: usize,
) -> Result<Complex64, FockError> {
    for (name, value) in [("eta", eta), ("nbar", nbar), ("tau_s", tau_s)] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(FockError::InvalidParameter { name, value });
        }
    }
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(FockError::InvalidParameter {
            name: "freq_hz",
            value: freq_hz,
        });
    }
    let required = required_fock_cutoff(nbar);
    if fock_cutoff < required {
        return Err(FockError::InsufficientCutoff {
            given: fock_cutoff,
            required,
        });
    }
    // Displacements of size η couple levels within a band of ~η√n.
    let margin = 40 + (8.0 * eta * (fock_cutoff as f64).sqrt()).ceil() as usize;
    let dim = fock_cutoff + margin;
    let wt = 2.0 * std::f64::consts::PI * freq_hz * tau_s;
    let i = Complex64::new(0.0, 1.0);
    let first = displacement_matrix(-i * eta, dim);
    let second = displacement_matrix(i * eta * Complex64::from_polar(1.0, -wt), dim);
    let q = nbar / (nbar + 1.0);
    let mut p = 1.0 / (nbar + 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..fock_cutoff {
        let mut diag = Complex64::new(0.0, 0.0);
        for m in 0..dim {
            diag += first[n * dim + m] * second[m * dim + n];
        }
        acc += diag * p;
        p *= q;
    }
    Ok(acc.conj())
}
