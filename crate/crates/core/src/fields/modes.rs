//! Fourier mode bookkeeping for the cube `[-N, N]³`.
//!
//! Modes are stored lexicographically with `n1` outermost and every
//! coordinate offset by `N`, so the mode `-n` of index `k` sits at
//! `count - 1 - k`.

pub type Mode = [i64; 3];

pub fn side(cutoff: usize) -> usize {
    2 * cutoff + 1
}

pub fn mode_count(cutoff: usize) -> usize {
    let s = side(cutoff);
    s * s * s
}

pub fn mode_index(cutoff: usize, n: Mode) -> usize {
    let c = cutoff as i64;
    let s = side(cutoff);
    debug_assert!(n.iter().all(|k| k.abs() <= c), "mode {n:?} outside cutoff {cutoff}");
    let o = |k: i64| (k + c) as usize;
    (o(n[0]) * s + o(n[1])) * s + o(n[2])
}

pub fn mode_vector(cutoff: usize, idx: usize) -> Mode {
    let s = side(cutoff);
    let c = cutoff as i64;
    [
        (idx / (s * s)) as i64 - c,
        ((idx / s) % s) as i64 - c,
        (idx % s) as i64 - c,
    ]
}

pub fn neg_index(cutoff: usize, idx: usize) -> usize {
    mode_count(cutoff) - 1 - idx
}

pub fn contains(cutoff: usize, n: Mode) -> bool {
    n.iter().all(|k| k.unsigned_abs() as usize <= cutoff)
}

pub fn norm_inf(n: Mode) -> usize {
    n.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
}

pub fn norm_sq(n: Mode) -> f64 {
    n.iter().map(|&k| (k * k) as f64).sum()
}

/// Membership in the half-space `I`: the first nonzero coordinate is positive.
pub fn in_half_space(n: Mode) -> bool {
    n.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0)
}

/// All modes of the cube in storage order.
pub fn modes(cutoff: usize) -> impl Iterator<Item = (usize, Mode)> {
    (0..mode_count(cutoff)).map(move |i| (i, mode_vector(cutoff, i)))
}

/// Grid index of a signed frequency on an `m`-point axis.
pub fn wrap(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// Signed frequency of grid index `i`; the Nyquist index of an even grid
/// is reported as `None`.
pub fn signed_frequency(i: usize, m: usize) -> Option<i64> {
    if m % 2 == 0 && i == m / 2 {
        None
    } else if i <= m / 2 {
        Some(i as i64)
    } else {
        Some(i as i64 - m as i64)
    }
}
