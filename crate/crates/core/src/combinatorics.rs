//! Permutations of `{1..N}` and their reduced words in adjacent transpositions.
//!
//! Images are stored 1-based so that `images()[i - 1] == σ(i)`. Applying the
//! adjacent transposition `T_a` to a permutation swaps the images at positions
//! `a` and `a + 1`; a word `[a_1, .., a_n]` means `T_{a_n} ∘ .. ∘ T_{a_1}`
//! applied to the identity, i.e. `a_1` is applied first.

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on `n` for full enumeration of `S_n`.
pub const DEFAULT_MAX_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image list".into()));
        }
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("image {v} repeated")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `σ(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    pub fn inversions(&self) -> usize {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.images[i] > self.images[j])
            .count()
    }

    /// Sign from the cycle type: each cycle of length `c` contributes `(-1)^(c-1)`.
    pub fn sign(&self) -> i64 {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut transpositions = 0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.images[i] - 1;
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// A reduced word `[a_1, .., a_n]` with `σ = T_{a_n} ∘ .. ∘ T_{a_1}`.
    ///
    /// Bubble-sorts the image list down to the identity and replays the swaps
    /// in reverse, so the word length equals the inversion count.
    pub fn adjacent_decomposition(&self) -> Vec<usize> {
        let mut word = self.images.clone();
        let mut swaps = Vec::new();
        let n = word.len();
        loop {
            let mut swapped = false;
            for p in 0..n.saturating_sub(1) {
                if word[p] > word[p + 1] {
                    word.swap(p, p + 1);
                    swaps.push(p + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        swaps.reverse();
        swaps
    }

    /// Another reduced word for `σ`: at each step `choose` receives the
    /// current descent positions and returns an index into them.
    pub fn reduced_word_by(&self, mut choose: impl FnMut(&[usize]) -> usize) -> Vec<usize> {
        let mut word = self.images.clone();
        let mut swaps = Vec::new();
        loop {
            let descents: Vec<usize> = (1..word.len()).filter(|&p| word[p - 1] > word[p]).collect();
            if descents.is_empty() {
                break;
            }
            let p = descents[choose(&descents) % descents.len()];
            word.swap(p - 1, p);
            swaps.push(p);
        }
        swaps.reverse();
        swaps
    }

    /// Recompose a word of adjacent transpositions applied to the identity.
    pub fn from_word(n: usize, word: &[usize]) -> Result<Permutation> {
        let mut images: Vec<usize> = (1..=n).collect();
        for &a in word {
            if a == 0 || a >= n {
                return Err(Error::IndexOutOfRange { index: a, max: n.saturating_sub(1) });
            }
            images.swap(a - 1, a);
        }
        Ok(Permutation { images })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All `n!` permutations in lexicographic order of their image lists.
pub fn enumerate(n: usize) -> Result<Vec<Permutation>> {
    enumerate_with_cap(n, DEFAULT_MAX_N)
}

pub fn enumerate_with_cap(n: usize, cap: usize) -> Result<Vec<Permutation>> {
    if n == 0 || n > cap {
        return Err(Error::Size { n, cap });
    }
    let mut current: Vec<usize> = (1..=n).collect();
    let mut out = Vec::with_capacity((1..=n).product());
    loop {
        out.push(Permutation { images: current.clone() });
        if !next_lexicographic(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exponent vectors of the monomials of the complete symmetric polynomial
/// `h_degree` in `n` variables: all `m ∈ ℕ^n` with `Σ m_i = degree`, in
/// lexicographically decreasing order.
pub fn weak_compositions(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn fill(rest: usize, slot: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == current.len() {
            current[slot] = rest;
            out.push(current.clone());
            return;
        }
        for take in (0..=rest).rev() {
            current[slot] = take;
            fill(rest - take, slot + 1, current, out);
        }
    }
    if n == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    fill(degree, 0, &mut vec![0; n], &mut out);
    out
}
