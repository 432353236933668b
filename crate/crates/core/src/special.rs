//! Bessel functions of the first kind for integer order and the cardinal sine.
//!
//! `J_n(x)` is evaluated by Miller's backward recurrence, normalised through
//! the Neumann identity `J_0 + 2 Σ J_2k = 1`. The start index sits well past
//! the turning point `k ≈ x`, so the recurrence is stable for every order
//! and argument used in this crate (|x| up to a few hundred).

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Series cutover for [`sinc`]; below this the Taylor form avoids cancellation.
const SINC_SERIES_BELOW: f64 = 1e-4;

fn start_index(max_order: usize, x: f64) -> usize {
    let reach = (max_order as f64).max(x);
    let m = reach + 40.0 + 8.0 * reach.sqrt();
    // even start keeps the normalisation sum aligned with J_2k terms
    2 * (m as usize).div_ceil(2)
}

/// Values `J_0(x) ..= J_max_order(x)` for `x > 0`, from one backward sweep.
fn miller_table(max_order: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = start_index(max_order, x);
    let mut out = vec![0.0; max_order + 1];
    let two_over_x = 2.0 / x;

    let mut above = 0.0; // j_{k+1}
    let mut current = 1e-300; // j_k, arbitrary seed
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above; // j_{k-1}
        above = current;
        current = below;
        let order = k - 1;
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * current;
        }
        if order <= max_order {
            out[order] = current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    norm += current; // J_0 term
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Bessel function of the first kind `J_n(x)` for integer `n` and real `x`.
///
/// Negative orders and arguments use `J_{-n}(x) = (-1)^n J_n(x)` and
/// `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    if ax == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    sign * miller_table(order, ax)[order]
}

/// `J_0(x) ..= J_max_order(x)` in one pass. Cheaper than repeated
/// [`bessel_j`] calls when many orders are needed at the same argument.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    if ax == 0.0 {
        let mut out = vec![0.0; max_order + 1];
        out[0] = 1.0;
        return out;
    }
    let mut out = miller_table(max_order, ax);
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Looks up a signed order in a table produced by [`bessel_j_orders`].
pub fn table_lookup(table: &[f64], n: i32) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = table[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_BELOW {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
