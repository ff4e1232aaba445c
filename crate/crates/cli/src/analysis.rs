use phase_qubit::propagators::deviation_f;
use phase_qubit::{Params, PropagationError, State};

// (time, value) of a sampled extremum refined by a parabola through its neighbours
fn refine(t: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv == 0.0 {
        return (t[i], b);
    }
    let off = 0.5 * (a - c) / curv;
    let h = 0.5 * (t[i + 1] - t[i - 1]);
    (t[i] + off * h, b - 0.25 * (a - c) * off)
}

fn extrema(t: &[f64], y: &[f64]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            maxima.push(refine(t, y, i));
        } else if y[i] < y[i - 1] && y[i] <= y[i + 1] {
            minima.push(refine(t, y, i));
        }
    }
    (maxima, minima)
}

/// Decay rate of the oscillation amplitude of `y(t)`.
///
/// Each maximum is measured above the straight line through its two
/// neighbouring minima, which removes the slowly varying background; the
/// rate is the slope of a least-squares line through `ln(amplitude)`.
/// `None` with fewer than three complete oscillations.
pub fn envelope_rate(t: &[f64], y: &[f64]) -> Option<f64> {
    let (maxima, minima) = extrema(t, y);
    let mut pts = Vec::new();
    for &(tm, ym) in &maxima {
        let before = minima.iter().rev().find(|m| m.0 < tm);
        let after = minima.iter().find(|m| m.0 > tm);
        if let (Some(&(ta, ya)), Some(&(tb, yb))) = (before, after) {
            let base = ya + (yb - ya) * (tm - ta) / (tb - ta);
            let amp = ym - base;
            if amp > 0.0 {
                pts.push((tm, amp.ln()));
            }
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Some(-sxy / sxx)
}

/// `F(t)` on `times`; points where it is undefined are skipped and counted.
pub fn deviation_curve(initial: &State, params: &Params, times: &[f64]) -> Result<(Vec<(f64, f64)>, usize), PropagationError> {
    let mut curve = Vec::with_capacity(times.len());
    let mut undefined = 0;
    for &t in times {
        match deviation_f(initial, params, t) {
            Ok(f) => curve.push((t, f)),
            Err(PropagationError::UndefinedDeviation { .. }) => undefined += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((curve, undefined))
}
