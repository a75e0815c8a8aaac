use super::WindowStats;

/// Terms kept in the small-w series of the truncated-Laplace variance.
const SERIES_TERMS: usize = 40;

/// Window statistics for a half-window δt and radiative lifetime τ_R.
///
/// w = δt/τ_R, Y = 1 − e^(−w) and
/// W = [1 − (1 + w + w²/2)e^(−w)] / (1 − e^(−w)).
///
/// The numerator equals e^(−w)·Σ_{k≥3} w^k/k!, which is evaluated directly
/// for w < 1 to avoid cancellation; W(0) = 0 by continuity.
pub fn window_stats(delta_t_s: f64, tau_r_s: f64) -> WindowStats {
    debug_assert!(tau_r_s > 0.0);
    let w = (delta_t_s / tau_r_s).max(0.0);
    if w == 0.0 {
        return WindowStats {
            w,
            big_w: 0.0,
            yield_y: 0.0,
        };
    }
    if w.is_infinite() {
        return WindowStats {
            w,
            big_w: 1.0,
            yield_y: 1.0,
        };
    }
    let yield_y = -(-w).exp_m1();
    let numerator = if w < 1.0 {
        let mut term = w * w * w / 6.0;
        let mut sum = 0.0;
        for k in 3..(3 + SERIES_TERMS) {
            sum += term;
            term *= w / (k + 1) as f64;
            if term < sum * 1e-18 {
                break;
            }
        }
        (-w).exp() * sum
    } else {
        1.0 - (1.0 + w + 0.5 * w * w) * (-w).exp()
    };
    WindowStats {
        w,
        big_w: numerator / yield_y,
        yield_y,
    }
}
