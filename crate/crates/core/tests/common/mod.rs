#![allow(dead_code)]

use newtonosc::{Multidegree, NewtonPolyhedron, Phase};
use proptest::prelude::*;

pub fn phase(d: usize, terms: &[(&[u32], i64)]) -> Phase {
    Phase::from_int_terms(d, terms).unwrap()
}

pub fn fig2() -> Phase {
    phase(2, &[(&[2, 2], 1), (&[1, 3], 1), (&[4, 5], -1)])
}

pub fn fig3() -> Phase {
    phase(2, &[(&[5, 0], 1), (&[0, 4], 1), (&[4, 1], 1)])
}

pub fn sum_of_squares() -> Phase {
    phase(2, &[(&[2, 0], 1), (&[0, 2], 1)])
}

pub fn square_of_difference() -> Phase {
    phase(2, &[(&[2, 0], 1), (&[1, 1], -2), (&[0, 2], 1)])
}

pub fn mixed_quintic() -> Phase {
    phase(2, &[(&[2, 2], 1), (&[5, 0], 1), (&[0, 5], 1)])
}

pub fn monomial(k: u32) -> Phase {
    phase(1, &[(&[k], 1)])
}

pub fn poly(p: &Phase) -> NewtonPolyhedron {
    NewtonPolyhedron::build(p).unwrap()
}

/// A nonzero multidegree with entries ≤ `max` whose total degree is at least 2.
pub fn multidegree(d: usize, max: u32) -> impl Strategy<Value = Multidegree> {
    prop::collection::vec(0..=max, d)
        .prop_filter("total degree ≥ 2", |v| v.iter().sum::<u32>() >= 2)
        .prop_map(Multidegree)
}

/// Between 1 and 8 support points with exponents ≤ 9.
pub fn support(d: usize) -> impl Strategy<Value = Vec<Multidegree>> {
    prop::collection::vec(multidegree(d, 9), 1..=8)
}

/// A nonzero lattice point with entries ≤ `max` (total degree may be 1).
pub fn lattice_point(d: usize, max: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max, d).prop_filter("nonzero", |v| v.iter().any(|&x| x > 0))
}
