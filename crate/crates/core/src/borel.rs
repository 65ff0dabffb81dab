//! Finite unions of real intervals with open/closed endpoints.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint<T> {
    Unbounded,
    Open(T),
    Closed(T),
}

impl<T: Real> Endpoint<T> {
    fn value(&self) -> Option<T> {
        match *self {
            Endpoint::Unbounded => None,
            Endpoint::Open(v) | Endpoint::Closed(v) => Some(v),
        }
    }

    fn closed(&self) -> bool {
        matches!(self, Endpoint::Closed(_))
    }

    fn flip(self) -> Self {
        match self {
            Endpoint::Unbounded => Endpoint::Unbounded,
            Endpoint::Open(v) => Endpoint::Closed(v),
            Endpoint::Closed(v) => Endpoint::Open(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: Endpoint<T>,
    pub hi: Endpoint<T>,
}

impl<T: Real> Interval<T> {
    pub fn contains(&self, x: T) -> bool {
        let above = match self.lo {
            Endpoint::Unbounded => true,
            Endpoint::Open(a) => x > a,
            Endpoint::Closed(a) => x >= a,
        };
        let below = match self.hi {
            Endpoint::Unbounded => true,
            Endpoint::Open(b) => x < b,
            Endpoint::Closed(b) => x <= b,
        };
        above && below
    }

    fn is_empty(&self) -> bool {
        match (self.lo.value(), self.hi.value()) {
            (Some(a), Some(b)) => a > b || (a == b && !(self.lo.closed() && self.hi.closed())),
            _ => false,
        }
    }
}

/// Lower endpoints ordered left to right; a closed `a` starts before an open `a`.
fn lo_before<T: Real>(x: &Endpoint<T>, y: &Endpoint<T>) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match (x.value(), y.value()) {
        (None, None) => Equal,
        (None, _) => Less,
        (_, None) => Greater,
        (Some(a), Some(b)) => a
            .partial_cmp(&b)
            .unwrap_or(Equal)
            .then_with(|| y.closed().cmp(&x.closed())),
    }
}

/// Upper endpoints ordered left to right; an open `b` ends before a closed `b`.
fn hi_before<T: Real>(x: &Endpoint<T>, y: &Endpoint<T>) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match (x.value(), y.value()) {
        (None, None) => Equal,
        (None, _) => Greater,
        (_, None) => Less,
        (Some(a), Some(b)) => a
            .partial_cmp(&b)
            .unwrap_or(Equal)
            .then_with(|| x.closed().cmp(&y.closed())),
    }
}

/// Whether an interval ending at `hi` overlaps or abuts one starting at `lo`.
fn joins<T: Real>(hi: &Endpoint<T>, lo: &Endpoint<T>) -> bool {
    match (hi.value(), lo.value()) {
        (None, _) | (_, None) => true,
        (Some(b), Some(a)) => a < b || (a == b && (hi.closed() || lo.closed())),
    }
}

/// A finite union of intervals in canonical form: disjoint, sorted, merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelSet<T> {
    intervals: Vec<Interval<T>>,
}

impl<T: Real> BorelSet<T> {
    pub fn from_intervals(mut intervals: Vec<Interval<T>>) -> Self {
        intervals.retain(|iv| !iv.is_empty());
        intervals.sort_by(|a, b| lo_before(&a.lo, &b.lo));
        let mut out: Vec<Interval<T>> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match out.last_mut() {
                Some(last) if joins(&last.hi, &iv.lo) => {
                    if hi_before(&last.hi, &iv.hi).is_lt() {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        BorelSet { intervals: out }
    }

    pub fn empty() -> Self {
        BorelSet { intervals: vec![] }
    }

    pub fn all() -> Self {
        BorelSet {
            intervals: vec![Interval {
                lo: Endpoint::Unbounded,
                hi: Endpoint::Unbounded,
            }],
        }
    }

    pub fn point(x: T) -> Self {
        Self::closed(x, x)
    }

    pub fn points(xs: &[T]) -> Self {
        Self::from_intervals(
            xs.iter()
                .map(|&x| Interval {
                    lo: Endpoint::Closed(x),
                    hi: Endpoint::Closed(x),
                })
                .collect(),
        )
    }

    pub fn closed(a: T, b: T) -> Self {
        Self::from_intervals(vec![Interval {
            lo: Endpoint::Closed(a),
            hi: Endpoint::Closed(b),
        }])
    }

    pub fn open(a: T, b: T) -> Self {
        Self::from_intervals(vec![Interval {
            lo: Endpoint::Open(a),
            hi: Endpoint::Open(b),
        }])
    }

    /// `(a, b]`
    pub fn left_open(a: T, b: T) -> Self {
        Self::from_intervals(vec![Interval {
            lo: Endpoint::Open(a),
            hi: Endpoint::Closed(b),
        }])
    }

    /// `(-∞, s]`
    pub fn at_most(s: T) -> Self {
        Self::from_intervals(vec![Interval {
            lo: Endpoint::Unbounded,
            hi: Endpoint::Closed(s),
        }])
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::from_intervals(all)
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut lo = Endpoint::Unbounded;
        for iv in &self.intervals {
            if !matches!(iv.lo, Endpoint::Unbounded) {
                out.push(Interval {
                    lo,
                    hi: iv.lo.flip(),
                });
            }
            lo = iv.hi.flip();
            if matches!(iv.hi, Endpoint::Unbounded) {
                return Self::from_intervals(out);
            }
        }
        out.push(Interval {
            lo,
            hi: Endpoint::Unbounded,
        });
        Self::from_intervals(out)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.complement().union(&other.complement()).complement()
    }
}
