//! Permutations of `{1..d}` with exact cycle-notation serialization.

use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{1..d}`. Stored 0-based; the public interface is 1-based
/// to match the usual cycle notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // images[i] = image of point i (0-based)
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from 1-based images: `images[i-1]` is the image of `i`.
    pub fn from_images_one_based(images: &[usize]) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &v in images {
            if v < 1 || v > d {
                return Err(Error::NotABijection {
                    degree: d,
                    detail: format!("image {v} out of range"),
                });
            }
            if seen[v - 1] {
                return Err(Error::NotABijection {
                    degree: d,
                    detail: format!("image {v} repeated"),
                });
            }
            seen[v - 1] = true;
        }
        Ok(Permutation {
            images: images.iter().map(|&v| v - 1).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1] + 1
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                expected: self.degree(),
                got: other.degree(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Disjoint cycles of length >= 2, each starting with its smallest element (1-based).
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.degree();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                seen[cur] = true;
                cyc.push(cur);
                cur = self.images[cur];
            }
            if cyc.len() > 1 {
                out.push(cyc.into_iter().map(|i| i + 1).collect());
            }
        }
        out
    }

    /// Parses cycle notation such as `(1 2)(3 4)`; `()` is the identity.
    /// The degree must be supplied since fixed points are not written out.
    pub fn parse_cycles(s: &str, degree: usize) -> Result<Permutation> {
        let s = s.trim();
        let mut images: Vec<usize> = (0..degree).collect();
        let mut rest = s;
        if rest.is_empty() {
            return Err(Error::Parse("empty permutation string".into()));
        }
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
            if !rest[..open].trim().is_empty() {
                return Err(Error::Parse(format!("stray text in {s:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced '(' in {s:?}")))?;
            let body = &rest[open + 1..close];
            rest = &rest[close + 1..];
            let pts: Vec<usize> = body
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad point {t:?} in {s:?}")))
                })
                .collect::<Result<_>>()?;
            if pts.is_empty() {
                continue; // "()" – identity cycle
            }
            if pts.len() == 1 {
                return Err(Error::Parse(format!("singleton cycle in {s:?}")));
            }
            for &p in &pts {
                if p < 1 || p > degree {
                    return Err(Error::Parse(format!(
                        "point {p} out of range 1..{degree} in {s:?}"
                    )));
                }
            }
            for w in pts.windows(2) {
                images[w[0] - 1] = w[1] - 1;
            }
            images[pts[pts.len() - 1] - 1] = pts[0] - 1;
        }
        // the writes above may silently collide for malformed input; re-validate
        Permutation::from_images_one_based(
            &images.iter().map(|&i| i + 1).collect::<Vec<_>>(),
        )
    }

    /// All d! permutations of degree d, in lexicographic order of image vectors.
    pub fn all(degree: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..degree).collect();
        loop {
            out.push(Permutation {
                images: cur.clone(),
            });
            // next lexicographic permutation
            let mut i = degree.wrapping_sub(2);
            while i != usize::MAX && cur[i] >= cur[i + 1] {
                i = i.wrapping_sub(1);
            }
            if i == usize::MAX {
                break;
            }
            let mut j = degree - 1;
            while cur[j] <= cur[i] {
                j -= 1;
            }
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cyc in cycles {
            write!(f, "(")?;
            for (i, p) in cyc.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[d={}]{}", self.degree(), self)
    }
}
