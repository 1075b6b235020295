//! Triple multisets on `[r]` with `r^2 - r` triples, every element in `3(r-1)` of them and
//! every pair in at most 6.
//!
//! Those three counts force every pair to be covered exactly six times, so the output is
//! a 2-(r, 3, 6) design. It is seeded with the zero-sum triples `{a, b, -a-b}` of `Z_r`
//! (each with multiplicity 6) and completed by hill climbing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Triples;
use crate::error::{Error, Result};

const LAMBDA: usize = 6;

struct Climber {
    r: usize,
    blocks: Vec<Option<[usize; 3]>>,
    free: Vec<usize>,
    /// Block ids covering each pair `(x, y)` with `x < y`.
    cover: Vec<Vec<usize>>,
}

impl Climber {
    fn pair(&self, x: usize, y: usize) -> usize {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        a * self.r + b
    }

    fn count(&self, x: usize, y: usize) -> usize {
        self.cover[self.pair(x, y)].len()
    }

    fn add(&mut self, t: [usize; 3]) {
        let id = match self.free.pop() {
            Some(id) => {
                self.blocks[id] = Some(t);
                id
            }
            None => {
                self.blocks.push(Some(t));
                self.blocks.len() - 1
            }
        };
        for (x, y) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            let p = self.pair(x, y);
            self.cover[p].push(id);
        }
    }

    fn remove(&mut self, id: usize) {
        let t = self.blocks[id].take().expect("live block");
        for (x, y) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            let p = self.pair(x, y);
            let list = &mut self.cover[p];
            let at = list.iter().position(|&b| b == id).expect("indexed block");
            list.swap_remove(at);
        }
        self.free.push(id);
    }

    fn live(&self) -> usize {
        self.blocks.len() - self.free.len()
    }
}

pub fn steiner_triples(r: usize) -> Result<Triples> {
    if r < 3 {
        return Err(Error::InvalidArgument("steiner_triples needs r >= 3".into()));
    }
    let mut st = Climber {
        r,
        blocks: Vec::new(),
        free: Vec::new(),
        cover: vec![Vec::new(); r * r],
    };
    for a in 0..r {
        for b in a + 1..r {
            let c = (2 * r - a - b) % r;
            if c > b {
                for _ in 0..LAMBDA {
                    st.add([a, b, c]);
                }
            }
        }
    }

    let target = r * r - r;
    let mut rng = ChaCha8Rng::seed_from_u64(r as u64);
    let mut steps = 0usize;
    while st.live() < target {
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::ConstructionFailure(format!(
                "hill climbing did not complete a triple multiset for r = {r}"
            )));
        }
        let live: Vec<usize> = (0..r)
            .filter(|&x| (0..r).any(|y| y != x && st.count(x, y) < LAMBDA))
            .collect();
        let x = live[rng.random_range(0..live.len())];
        let open: Vec<usize> = (0..r)
            .filter(|&y| y != x && st.count(x, y) < LAMBDA)
            .collect();
        let y = open[rng.random_range(0..open.len())];
        let z = if open.len() >= 2 {
            loop {
                let z = open[rng.random_range(0..open.len())];
                if z != y {
                    break z;
                }
            }
        } else {
            // `x` lacks cover only with `y`; borrow a slot from a full pair `(x, z)`.
            loop {
                let z = rng.random_range(0..r);
                if z != x && z != y {
                    break z;
                }
            }
        };
        // Neither removal can hit `{x, y, z}` itself: that would put `(x, y)` at capacity.
        for (a, b, keep) in [(y, z, x), (x, z, y)] {
            if st.count(a, b) >= LAMBDA {
                let p = st.pair(a, b);
                let candidates: Vec<usize> = st.cover[p]
                    .iter()
                    .copied()
                    .filter(|&id| !st.blocks[id].unwrap().contains(&keep))
                    .collect();
                let id = candidates[rng.random_range(0..candidates.len())];
                st.remove(id);
            }
        }
        let mut t = [x, y, z];
        t.sort_unstable();
        st.add(t);
    }

    let mut out: Triples = st.blocks.into_iter().flatten().collect();
    out.sort_unstable();
    verify_steiner(r, &out)?;
    Ok(out)
}

/// Checks `|U| = r^2 - r`, element degree `3(r-1)` and pair multiplicity at most 6.
pub fn verify_steiner(r: usize, triples: &[[usize; 3]]) -> Result<()> {
    let fail = |msg: String| Err(Error::ConstructionFailure(msg));
    if triples.len() != r * r - r {
        return fail(format!("{} triples, expected {}", triples.len(), r * r - r));
    }
    let mut deg = vec![0usize; r];
    let mut pair = vec![0usize; r * r];
    for t in triples {
        if t.iter().any(|&x| x >= r) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return fail(format!("invalid triple {t:?}"));
        }
        for &x in t {
            deg[x] += 1;
        }
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            pair[a.min(b) * r + a.max(b)] += 1;
        }
    }
    if let Some(x) = (0..r).find(|&x| deg[x] != 3 * (r - 1)) {
        return fail(format!("element {x} lies in {} triples, expected {}", deg[x], 3 * (r - 1)));
    }
    if let Some(p) = (0..r * r).find(|&p| pair[p] > LAMBDA) {
        return fail(format!("pair ({}, {}) lies in {} triples", p / r, p % r, pair[p]));
    }
    Ok(())
}
