//! Named built-in posets.

use crate::order::{parse_poset, Poset};

pub const CH2: &str = "poset CH2 { elems 1 a; order a<1; }";
pub const FORK3: &str = "poset FORK3 { elems 1 a b; order a<1 b<1; }";
pub const NSEP4: &str = "poset NSEP4 { elems 1 a b c; order c<a c<b a<1 b<1; }";
/// `a` and `b` are compatible but have two maximal common lower bounds.
pub const NWM5: &str = "poset NWM5 { elems 1 a b c d; order c<a c<b d<a d<b a<1 b<1; }";

pub fn ch2() -> Poset {
    parse_poset(CH2).expect("fixture")
}

pub fn fork3() -> Poset {
    parse_poset(FORK3).expect("fixture")
}

pub fn nsep4() -> Poset {
    parse_poset(NSEP4).expect("fixture")
}

pub fn nwm5() -> Poset {
    parse_poset(NWM5).expect("fixture")
}

/// Looks up a built-in by name (case-insensitive).
pub fn builtin(name: &str) -> Option<Poset> {
    match name.to_ascii_uppercase().as_str() {
        "CH2" => Some(ch2()),
        "FORK3" => Some(fork3()),
        "NSEP4" => Some(nsep4()),
        "NWM5" => Some(nwm5()),
        _ => None,
    }
}

pub fn builtins() -> Vec<Poset> {
    vec![ch2(), fork3(), nsep4(), nwm5()]
}
