//! Threshold location: bracketing scan plus finite-size scaling fit.
//!
//! The failure rate near threshold follows a quadratic in the scaling
//! variable x = (p - p_th) d^(1/nu0):
//!
//!   P_fail = A + B x + C x^2
//!
//! Fitting strategy: the exponent enters as s = 1/nu0, the combination the
//! data constrains almost linearly through slope ratios across distances.
//! For fixed (p_th, s) the model is linear in (A, B, C), so a coarse grid
//! with exact weighted linear solves picks a start, then Levenberg-Marquardt
//! refines all five parameters with an analytic Jacobian. The covariance is
//! the inverted Gauss-Newton Hessian at the optimum, inflated by cost/dof
//! when the scatter exceeds the quoted errors; reported uncertainties are
//! 2 sigma.

use crate::analysis::DataPoint;
use crate::error::{Error, Result};

/// Fitted exponent bounds, s = 1/nu0 with nu0 in (0.2, 6).
const S_MIN: f64 = 1.0 / 6.0;
const S_MAX: f64 = 5.0;

/// Which noise parameter a sweep scans over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    Cer,
    Ber,
}

impl ScanAxis {
    /// Scanned value of a data point.
    pub fn value(self, point: &DataPoint) -> f64 {
        match self {
            ScanAxis::Cer => point.cer,
            ScanAxis::Ber => point.ber,
        }
    }

    /// Axis name as used in keys and messages.
    pub fn label(self) -> &'static str {
        match self {
            ScanAxis::Cer => "cer",
            ScanAxis::Ber => "ber",
        }
    }
}

/// Finite-size scaling fit result.
///
/// The covariance is over the fitted parameters (A, B, C, p_th, s) with
/// s = 1/nu0, already inflated by max(1, cost/dof).
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p_th: f64,
    pub nu0: f64,
    pub covariance: [[f64; 5]; 5],
    pub cost: f64,
    pub converged: bool,
}

impl FitResult {
    /// 2-sigma uncertainty on the threshold.
    pub fn p_th_uncertainty(&self) -> f64 {
        2.0 * self.covariance[3][3].max(0.0).sqrt()
    }

    /// 2-sigma uncertainty on the scaling exponent, propagated from s = 1/nu0.
    pub fn nu0_uncertainty(&self) -> f64 {
        2.0 * self.covariance[4][4].max(0.0).sqrt() * self.nu0 * self.nu0
    }

    /// 2-sigma confidence interval for nu0, the exact image of s +/- 2 sigma.
    ///
    /// Asymmetric because nu0 = 1/s; the upper end is infinite when s is
    /// within 2 sigma of zero.
    pub fn nu0_interval(&self) -> (f64, f64) {
        let s = 1.0 / self.nu0;
        let u = 2.0 * self.covariance[4][4].max(0.0).sqrt();
        let hi = if s - u > 0.0 { 1.0 / (s - u) } else { f64::INFINITY };
        (1.0 / (s + u), hi)
    }

    /// Model prediction at one point.
    pub fn predict(&self, p: f64, d: u32) -> f64 {
        let x = (p - self.p_th) * (d as f64).powf(1.0 / self.nu0);
        self.a + self.b * x + self.c * x * x
    }
}

#[derive(Debug, PartialEq)]
enum Trend {
    Suppressing,
    Increasing,
    Ambiguous,
}

/// Classify one scan group, tolerating single-point wiggles within 2 sigma.
fn trend(group: &[DataPoint]) -> Trend {
    let first = &group[0];
    let last = &group[group.len() - 1];
    let net = last.p_fail - first.p_fail;
    let slack = |a: &DataPoint, b: &DataPoint| {
        2.0 * (a.fit_se() * a.fit_se() + b.fit_se() * b.fit_se()).sqrt()
    };
    let ok_down =
        group.windows(2).all(|w| w[1].p_fail < w[0].p_fail + slack(&w[0], &w[1]));
    let ok_up = group.windows(2).all(|w| w[1].p_fail > w[0].p_fail - slack(&w[0], &w[1]));
    if net < 0.0 && ok_down {
        Trend::Suppressing
    } else if net > 0.0 && ok_up {
        Trend::Increasing
    } else {
        Trend::Ambiguous
    }
}

/// Sort points into groups sharing a scan value, ascending, each sorted by
/// distance.
fn group_by_scan(points: &[DataPoint], axis: ScanAxis) -> Vec<(f64, Vec<DataPoint>)> {
    let mut sorted: Vec<DataPoint> = points.to_vec();
    sorted.sort_by(|a, b| {
        axis.value(a).total_cmp(&axis.value(b)).then(a.d.cmp(&b.d))
    });
    let mut groups: Vec<(f64, Vec<DataPoint>)> = vec![];
    for p in sorted {
        let v = axis.value(&p);
        match groups.last_mut() {
            Some((gv, g)) if *gv == v => g.push(p),
            _ => groups.push((v, vec![p])),
        }
    }
    groups
}

/// Bracket the threshold: the largest scan value still suppressing errors
/// with distance and the smallest already amplifying them.
pub fn bracket_threshold(points: &[DataPoint], axis: ScanAxis) -> Result<(f64, f64)> {
    let groups = group_by_scan(points, axis);
    if groups.len() < 2 {
        return Err(Error::Analysis(format!(
            "need at least 2 {} values to bracket, got {}",
            axis.label(),
            groups.len()
        )));
    }
    let mut low: Option<f64> = None;
    let mut high: Option<f64> = None;
    for (v, group) in &groups {
        if group.len() < 3 {
            return Err(Error::Analysis(format!(
                "{} = {v}: need at least 3 distances, got {}",
                axis.label(),
                group.len()
            )));
        }
        match trend(group) {
            Trend::Suppressing => low = Some(*v),
            Trend::Increasing => {
                if high.is_none() {
                    high = Some(*v);
                }
            }
            Trend::Ambiguous => {}
        }
    }
    match (low, high) {
        (Some(lo), Some(hi)) if lo < hi => Ok((lo, hi)),
        (Some(_), Some(_)) => Err(Error::Analysis(format!(
            "no clean bracket: suppression and amplification interleave in {}",
            axis.label()
        ))),
        (Some(_), None) => Err(Error::Analysis(format!(
            "threshold out of range: increase {}",
            axis.label()
        ))),
        (None, _) => Err(Error::Analysis(format!(
            "threshold out of range: decrease {}",
            axis.label()
        ))),
    }
}

/// Solve a dense linear system in place; None when singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (pivot_rows, tail) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        for (offset, row) in tail.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            for (x, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col][k] * x[k];
        }
        x[col] = sum / a[col][col];
    }
    Some(x)
}

/// Invert a 5x5 matrix by solving against the identity columns.
fn invert5(h: &[[f64; 5]; 5]) -> Option<[[f64; 5]; 5]> {
    let mut out = [[0.0; 5]; 5];
    for col in 0..5 {
        let mut rhs = vec![0.0; 5];
        rhs[col] = 1.0;
        let a: Vec<Vec<f64>> = h.iter().map(|row| row.to_vec()).collect();
        let x = solve_linear(a, rhs)?;
        for row in 0..5 {
            out[row][col] = x[row];
        }
    }
    Some(out)
}

struct FitData {
    p: Vec<f64>,
    d: Vec<f64>,
    y: Vec<f64>,
    inv_se: Vec<f64>,
}

impl FitData {
    /// Weighted residuals (model - y)/se for theta = (a,b,c,p_th,s).
    fn residuals(&self, theta: &[f64; 5]) -> Vec<f64> {
        let [a, b, c, p_th, s] = *theta;
        (0..self.y.len())
            .map(|i| {
                let x = (self.p[i] - p_th) * self.d[i].powf(s);
                (a + b * x + c * x * x - self.y[i]) * self.inv_se[i]
            })
            .collect()
    }

    fn cost(&self, theta: &[f64; 5]) -> f64 {
        self.residuals(theta).iter().map(|r| r * r).sum()
    }

    /// Analytic Jacobian rows scaled by 1/se.
    fn jacobian(&self, theta: &[f64; 5]) -> Vec<[f64; 5]> {
        let [_, b, c, p_th, s] = *theta;
        (0..self.y.len())
            .map(|i| {
                let scale = self.d[i].powf(s);
                let x = (self.p[i] - p_th) * scale;
                let slope = b + 2.0 * c * x;
                let w = self.inv_se[i];
                [w, x * w, x * x * w, -slope * scale * w, slope * x * self.d[i].ln() * w]
            })
            .collect()
    }

    /// Exact weighted linear solve for (a, b, c) at fixed (p_th, s).
    fn linear_abc(&self, p_th: f64, s: f64) -> Option<[f64; 5]> {
        let mut h = vec![vec![0.0; 3]; 3];
        let mut g = vec![0.0; 3];
        for i in 0..self.y.len() {
            let x = (self.p[i] - p_th) * self.d[i].powf(s);
            let basis = [1.0, x, x * x];
            let w2 = self.inv_se[i] * self.inv_se[i];
            for r in 0..3 {
                g[r] += w2 * basis[r] * self.y[i];
                for c in 0..3 {
                    h[r][c] += w2 * basis[r] * basis[c];
                }
            }
        }
        let abc = solve_linear(h, g)?;
        Some([abc[0], abc[1], abc[2], p_th, s])
    }
}

/// Fit the quadratic scaling ansatz by multi-start plus Levenberg-Marquardt.
pub fn fit_threshold(points: &[DataPoint], axis: ScanAxis) -> Result<FitResult> {
    let mut distances: Vec<u32> = points.iter().map(|p| p.d).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return Err(Error::Analysis(
            "threshold fit needs at least 2 distinct distances".into(),
        ));
    }
    let mut scans: Vec<f64> = points.iter().map(|p| axis.value(p)).collect();
    scans.sort_by(f64::total_cmp);
    scans.dedup();
    if scans.len() < 4 || points.len() < 8 {
        return Err(Error::Analysis(format!(
            "threshold fit needs >= 4 {} values and >= 8 points, got {} and {}",
            axis.label(),
            scans.len(),
            points.len()
        )));
    }
    for p in points {
        if p.fit_se() <= 0.0 {
            return Err(Error::Analysis(format!(
                "point (d={}, {}={}) has non-positive standard error",
                p.d,
                axis.label(),
                axis.value(p)
            )));
        }
    }
    let data = FitData {
        p: points.iter().map(|p| axis.value(p)).collect(),
        d: points.iter().map(|p| p.d as f64).collect(),
        y: points.iter().map(|p| p.p_fail).collect(),
        inv_se: points.iter().map(|p| 1.0 / p.fit_se()).collect(),
    };
    let (p_lo, p_hi) = (scans[0], scans[scans.len() - 1]);

    // Coarse grid with exact linear solves picks the refinement start.
    let mut best: Option<([f64; 5], f64)> = None;
    for gi in 0..41 {
        let p_th = p_lo + (p_hi - p_lo) * gi as f64 / 40.0;
        for nu_i in 0..8 {
            let s = 1.0 / (0.8 + 0.2 * nu_i as f64);
            let Some(theta) = data.linear_abc(p_th, s) else { continue };
            let cost = data.cost(&theta);
            if cost.is_finite() && best.as_ref().is_none_or(|(_, c)| cost < *c) {
                best = Some((theta, cost));
            }
        }
    }
    let Some((mut theta, mut cost)) = best else {
        return Err(Error::Analysis("threshold fit grid found no usable start".into()));
    };

    // Levenberg-Marquardt refinement over all five parameters.
    let mut lambda = 1e-3;
    let mut plateau = false;
    for _ in 0..200 {
        let r = data.residuals(&theta);
        let j = data.jacobian(&theta);
        let mut h = [[0.0; 5]; 5];
        let mut g = [0.0; 5];
        for (row, ri) in j.iter().zip(&r) {
            for a in 0..5 {
                g[a] += row[a] * ri;
                for b in 0..5 {
                    h[a][b] += row[a] * row[b];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..25 {
            let mut damped: Vec<Vec<f64>> = h.iter().map(|r| r.to_vec()).collect();
            for (k, row) in damped.iter_mut().enumerate() {
                row[k] += lambda * h[k][k].max(1e-12);
            }
            let Some(delta) = solve_linear(damped, g.iter().map(|v| -v).collect()) else {
                lambda *= 5.0;
                continue;
            };
            let mut trial = theta;
            for k in 0..5 {
                trial[k] += delta[k];
            }
            // Keep the exponent physical; outside, the scale powf misbehaves.
            if !(S_MIN..=S_MAX).contains(&trial[4]) {
                lambda *= 5.0;
                continue;
            }
            let trial_cost = data.cost(&trial);
            if trial_cost.is_finite() && trial_cost < cost {
                plateau = cost - trial_cost <= 1e-14 + 1e-10 * cost;
                theta = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                stepped = true;
                break;
            }
            lambda *= 5.0;
        }
        if !stepped {
            plateau = true;
            break;
        }
        if plateau {
            break;
        }
    }

    // Covariance from the Gauss-Newton Hessian at the optimum, inflated by
    // cost/dof when the fit is poorer than its errors claim.
    let j = data.jacobian(&theta);
    let mut h = [[0.0; 5]; 5];
    for row in &j {
        for a in 0..5 {
            for b in 0..5 {
                h[a][b] += row[a] * row[b];
            }
        }
    }
    let dof = points.len() as f64 - 5.0;
    let inflation = if dof > 0.0 { (cost / dof).max(1.0) } else { 1.0 };
    let (covariance, invertible) = match invert5(&h) {
        Some(mut c) => {
            for row in &mut c {
                for v in row.iter_mut() {
                    *v *= inflation;
                }
            }
            (c, true)
        }
        None => ([[0.0; 5]; 5], false),
    };
    let in_range = (p_lo..=p_hi).contains(&theta[3]);
    let s_interior = theta[4] > S_MIN + 1e-9 && theta[4] < S_MAX - 1e-9;
    Ok(FitResult {
        a: theta[0],
        b: theta[1],
        c: theta[2],
        p_th: theta[3],
        nu0: 1.0 / theta[4],
        covariance,
        cost,
        converged: plateau && invertible && in_range && s_interior,
    })
}
