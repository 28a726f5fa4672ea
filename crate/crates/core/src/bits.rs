//! Word-sized bit sets. Posets and Boolean algebras are capped at 64 points.

pub type Mask = u64;

pub const MAX_POINTS: usize = 64;

#[inline]
pub fn bit(i: usize) -> Mask {
    1u64 << i
}

#[inline]
pub fn has(m: Mask, i: usize) -> bool {
    m >> i & 1 == 1
}

#[inline]
pub fn full(n: usize) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub fn subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Indices of set bits, ascending.
pub fn ones(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Mask {
    it.into_iter().fold(0, |m, i| m | bit(i))
}

pub fn count(m: Mask) -> usize {
    m.count_ones() as usize
}
