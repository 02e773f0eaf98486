//! Qubit-overhead extrapolation to the teraquop regime.
//!
//! Below threshold the failure rate falls exponentially with distance, so a
//! weighted line fit of ln p_fail against d extrapolates to the smallest odd
//! distance d* whose predicted rate reaches 1e-12; the overhead is the
//! register size Q = 2 d*^2 - 1 (d^2 data plus d^2 - 1 ancilla qubits).
//!
//! Slope uncertainty comes from the weighted-least-squares cost profile:
//! the two slopes that raise the minimal cost by exactly one (intercept
//! re-optimized) bound the extrapolation. Zero-failure points carry no
//! usable logarithm and are excluded but reported.

use crate::analysis::DataPoint;
use crate::error::{Error, Result};

/// Target logical failure rate defining the teraquop regime.
pub const TERAQUOP_TARGET: f64 = 1e-12;

/// Suppression-line fit and its extrapolated overhead.
#[derive(Debug, Clone, PartialEq)]
pub struct TeraquopEstimate {
    /// Slope of ln p_fail vs d; negative in the suppression regime.
    pub slope: f64,
    pub intercept: f64,
    /// Smallest odd distance with predicted p_fail <= 1e-12.
    pub d_star: u32,
    /// Physical qubits per logical qubit at d_star.
    pub qubits: u64,
    pub d_star_low: u32,
    pub qubits_low: u64,
    pub d_star_high: u32,
    pub qubits_high: u64,
    /// Distances whose zero failure count kept them out of the fit.
    pub excluded_distances: Vec<u32>,
}

/// Register size of one rotated patch: d^2 data + d^2 - 1 ancillas.
pub fn register_size(d: u32) -> u64 {
    2 * (d as u64) * (d as u64) - 1
}

/// Weighted moments of the ln p_fail vs d regression.
struct LineFit {
    /// Minimizing slope and intercept.
    slope: f64,
    intercept: f64,
    /// Weighted sums: s = sum w, sx = sum w d, sxx = sum w d^2.
    s: f64,
    sx: f64,
    /// Curvature of the cost profile in slope after intercept
    /// re-optimization: cost(b) = cost_min + curvature (b - slope)^2.
    curvature: f64,
    points: Vec<(f64, f64, f64)>,
}

impl LineFit {
    fn new(points: &[(f64, f64, f64)]) -> Result<LineFit> {
        let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, y, w) in points {
            s += w;
            sx += w * d;
            sy += w * y;
            sxx += w * d * d;
            sxy += w * d * y;
        }
        let det = s * sxx - sx * sx;
        if det <= 0.0 {
            return Err(Error::Analysis("degenerate suppression fit".into()));
        }
        let slope = (s * sxy - sx * sy) / det;
        let intercept = (sy - slope * sx) / s;
        Ok(LineFit {
            slope,
            intercept,
            s,
            sx,
            curvature: sxx - sx * sx / s,
            points: points.to_vec(),
        })
    }

    /// Cost with the intercept re-optimized for the given slope.
    #[cfg(test)]
    fn profiled_cost(&self, slope: f64) -> f64 {
        let intercept = self.intercept_for(slope);
        self.points
            .iter()
            .map(|&(d, y, w)| {
                let r = intercept + slope * d - y;
                w * r * r
            })
            .sum()
    }

    /// Intercept minimizing cost at a fixed slope.
    fn intercept_for(&self, slope: f64) -> f64 {
        let sy: f64 = self.points.iter().map(|&(_, y, w)| w * y).sum::<f64>();
        (sy - slope * self.sx) / self.s
    }

    /// Slopes raising the minimal cost by one, closed form.
    fn delta_one_slopes(&self) -> (f64, f64) {
        let half_width = (1.0 / self.curvature).sqrt();
        (self.slope - half_width, self.slope + half_width)
    }

    /// Same bounds found numerically; independent check of the closed form.
    #[cfg(test)]
    fn delta_one_slopes_bisection(&self) -> (f64, f64) {
        let base = self.profiled_cost(self.slope);
        let solve = |direction: f64| {
            let mut step = self.slope.abs().max(1e-3) * 1e-3;
            while self.profiled_cost(self.slope + direction * step) < base + 1.0 {
                step *= 2.0;
            }
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if self.profiled_cost(self.slope + direction * mid) < base + 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            self.slope + direction * 0.5 * (lo + hi)
        };
        (solve(-1.0), solve(1.0))
    }
}

/// Smallest odd d >= 3 whose predicted rate reaches the target.
fn d_star_for(slope: f64, intercept: f64) -> Result<u32> {
    if slope >= 0.0 {
        return Err(Error::Analysis(
            "not in suppression regime: ln p_fail slope is non-negative".into(),
        ));
    }
    let target = TERAQUOP_TARGET.ln();
    let d_real = (target - intercept) / slope;
    if d_real > 9999.0 {
        return Err(Error::Analysis(format!(
            "suppression too weak: extrapolated distance {d_real:.0} exceeds 9999"
        )));
    }
    let mut d = (d_real.ceil().max(3.0)) as u32;
    if d.is_multiple_of(2) {
        d += 1;
    }
    while intercept + slope * d as f64 > target {
        d += 2;
    }
    while d > 3 && intercept + slope * (d - 2) as f64 <= target {
        d -= 2;
    }
    Ok(d)
}

/// Extrapolate the teraquop overhead from one (cer, ber) suppression series.
pub fn teraquop(points: &[DataPoint]) -> Result<TeraquopEstimate> {
    let mut usable: Vec<&DataPoint> = vec![];
    let mut excluded_distances = vec![];
    for p in points {
        if p.failures == 0 {
            excluded_distances.push(p.d);
        } else if p.failures == p.shots {
            return Err(Error::Analysis(format!(
                "d={}: saturated failure rate cannot be log-fitted",
                p.d
            )));
        } else {
            usable.push(p);
        }
    }
    usable.sort_by_key(|p| p.d);
    excluded_distances.sort_unstable();
    if usable.len() < 3 {
        return Err(Error::Analysis(format!(
            "suppression fit needs >= 3 distances with failures, got {}",
            usable.len()
        )));
    }
    // ln p carries standard error se/p; weights are its inverse square.
    let fit_points: Vec<(f64, f64, f64)> = usable
        .iter()
        .map(|p| {
            let se_ln = p.se / p.p_fail;
            (p.d as f64, p.p_fail.ln(), 1.0 / (se_ln * se_ln))
        })
        .collect();
    let fit = LineFit::new(&fit_points)?;
    let (steep, shallow) = fit.delta_one_slopes();
    if shallow >= 0.0 {
        return Err(Error::Analysis(
            "suppression not resolved: slope uncertainty reaches zero".into(),
        ));
    }
    let d_star = d_star_for(fit.slope, fit.intercept)?;
    let d_star_low = d_star_for(steep, fit.intercept_for(steep))?;
    let d_star_high = d_star_for(shallow, fit.intercept_for(shallow))?;
    debug_assert!(d_star_low <= d_star && d_star <= d_star_high);
    Ok(TeraquopEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        d_star,
        qubits: register_size(d_star),
        d_star_low,
        qubits_low: register_size(d_star_low),
        d_star_high,
        qubits_high: register_size(d_star_high),
        excluded_distances,
    })
}
