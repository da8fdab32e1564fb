/// Flips `v` so that its largest-magnitude entry is positive. Ties in
/// magnitude go to the lowest index. Returns `false` for a zero vector, which
/// is left untouched.
pub fn canonicalize_sign(v: &mut [f64]) -> bool {
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best = i;
            best_abs = x.abs();
        }
    }
    if best_abs == 0.0 {
        return false;
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    true
}
