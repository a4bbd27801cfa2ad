//! Divide-and-conquer extraction of a preferred minimal subset satisfying a
//! monotone predicate.

/// Returns a ⊆-minimal sub-list `S` of `items` with `holds(S)`.
///
/// `holds` must be monotone (true for every superset of a satisfying set),
/// true on all of `items` and false on the empty list; callers check this.
/// Earlier items are preferred: the result is the antilexicographically
/// best minimal subset under the list order. Each call to `holds` gets its
/// argument in list order.
pub fn quickxplain<T: Clone>(items: &[T], mut holds: impl FnMut(&[T]) -> bool) -> Vec<T> {
    if items.is_empty() {
        return Vec::new();
    }
    let mut base = Vec::new();
    let mut found = qx(&mut base, false, items, &mut holds);
    found.shrink_to_fit();
    found
}

fn qx<T: Clone>(
    base: &mut Vec<T>,
    delta_nonempty: bool,
    candidates: &[T],
    holds: &mut impl FnMut(&[T]) -> bool,
) -> Vec<T> {
    if delta_nonempty && holds(base) {
        return Vec::new();
    }
    if candidates.len() == 1 {
        return candidates.to_vec();
    }
    let k = candidates.len().div_ceil(2);
    let (c1, c2) = candidates.split_at(k);

    let mark = base.len();
    base.extend_from_slice(c1);
    let d2 = qx(base, true, c2, holds);
    base.truncate(mark);

    base.extend_from_slice(&d2);
    let d1 = qx(base, !d2.is_empty(), c1, holds);
    base.truncate(mark);

    let mut out = d1;
    out.extend(d2);
    out
}
