//! Backtracking search for induced embeddings.

use std::collections::HashMap;
use std::ops::ControlFlow;

use super::{Embedding, Structure};
use crate::error::Result;

const UNSET: usize = usize::MAX;

type Filter<'a> = Box<dyn Fn(&[usize], usize, usize) -> bool + 'a>;

/// Configurable induced-embedding search of `pattern` into `target`.
///
/// By default pattern vertices are assigned in index order with ascending
/// candidates, so embeddings are produced in lexicographic order of the
/// image sequence.
pub struct Matcher<'a> {
    pattern: &'a Structure,
    target: &'a Structure,
    pinned: Vec<usize>,
    allowed: Vec<Option<Vec<usize>>>,
    filter: Option<Filter<'a>>,
    lex: bool,
}

impl<'a> Matcher<'a> {
    pub fn new(pattern: &'a Structure, target: &'a Structure) -> Result<Self> {
        pattern.signature().ensure_same(target.signature())?;
        Ok(Self {
            pattern,
            target,
            pinned: vec![UNSET; pattern.size()],
            allowed: vec![None; pattern.size()],
            filter: None,
            lex: true,
        })
    }

    /// Forces pattern vertex `p` onto target vertex `t`.
    pub fn pin(mut self, p: usize, t: usize) -> Self {
        self.pinned[p] = t;
        self
    }

    /// Restricts the images of `p` to `targets` (any order).
    pub fn allow(mut self, p: usize, mut targets: Vec<usize>) -> Self {
        targets.sort_unstable();
        targets.dedup();
        self.allowed[p] = Some(match self.allowed[p].take() {
            Some(prev) => targets.into_iter().filter(|t| prev.binary_search(t).is_ok()).collect(),
            None => targets,
        });
        self
    }

    /// Extra pruning predicate `(partial map, pattern vertex, candidate) -> keep`.
    /// Unassigned entries of the partial map are `usize::MAX`.
    pub fn filter(mut self, f: impl Fn(&[usize], usize, usize) -> bool + 'a) -> Self {
        self.filter = Some(Box::new(f));
        self
    }

    /// Chooses a connectivity-driven assignment order. Faster on sparse
    /// targets; output order is then deterministic but not lexicographic.
    pub fn connected_order(mut self) -> Self {
        self.lex = false;
        self
    }

    fn order(&self) -> Vec<usize> {
        let n = self.pattern.size();
        if self.lex {
            return (0..n).collect();
        }
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for (p, done) in placed.iter_mut().enumerate() {
            if self.pinned[p] != UNSET {
                *done = true;
                order.push(p);
            }
        }
        while order.len() < n {
            let best = (0..n)
                .filter(|&p| !placed[p])
                .max_by_key(|&p| {
                    let links = self.pattern.neighbours(p).iter().filter(|&&q| placed[q]).count();
                    let room = self.allowed[p].as_ref().map_or(usize::MAX, Vec::len);
                    (
                        links,
                        std::cmp::Reverse(room),
                        self.pattern.neighbours(p).len(),
                        std::cmp::Reverse(p),
                    )
                })
                .unwrap();
            placed[best] = true;
            order.push(best);
        }
        order
    }

    /// Visits every embedding (as `map[pattern vertex] = target vertex`) until the callback breaks.
    pub fn run(&self, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) {
        let order = self.order();
        let mut position = vec![0; order.len()];
        for (i, &p) in order.iter().enumerate() {
            position[p] = i;
        }
        let anchors: Vec<Option<usize>> = order
            .iter()
            .map(|&p| {
                self.pattern
                    .neighbours(p)
                    .iter()
                    .copied()
                    .filter(|&q| position[q] < position[p])
                    .min_by_key(|&q| position[q])
            })
            .collect();
        let mut state = State {
            map: vec![UNSET; self.pattern.size()],
            inverse: vec![UNSET; self.target.size()],
        };
        let _ = self.extend(&order, &anchors, 0, &mut state, &mut visit);
    }

    fn extend(
        &self,
        order: &[usize],
        anchors: &[Option<usize>],
        depth: usize,
        state: &mut State,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if depth == order.len() {
            return visit(&state.map);
        }
        let p = order[depth];
        let all: Vec<usize>;
        let candidates: &[usize] = if self.pinned[p] != UNSET {
            std::slice::from_ref(&self.pinned[p])
        } else if let Some(q) = anchors[depth] {
            self.target.neighbours(state.map[q])
        } else if let Some(list) = &self.allowed[p] {
            list
        } else {
            all = (0..self.target.size()).collect();
            &all
        };
        for &t in candidates {
            if t >= self.target.size() || state.inverse[t] != UNSET {
                continue;
            }
            if let Some(list) = &self.allowed[p] {
                if list.binary_search(&t).is_err() {
                    continue;
                }
            }
            if self.pattern.neighbours(p).len() > self.target.neighbours(t).len() {
                continue;
            }
            if let Some(f) = &self.filter {
                if !f(&state.map, p, t) {
                    continue;
                }
            }
            state.map[p] = t;
            state.inverse[t] = p;
            if self.consistent(state, p, t) {
                self.extend(order, anchors, depth + 1, state, visit)?;
            }
            state.map[p] = UNSET;
            state.inverse[t] = UNSET;
        }
        ControlFlow::Continue(())
    }

    fn consistent(&self, state: &State, p: usize, t: usize) -> bool {
        for &q in self.pattern.neighbours(p) {
            let img = state.map[q];
            if img != UNSET && !self.target.adjacent(t, img) {
                return false;
            }
        }
        let mut buf = Vec::new();
        for &(r, i) in self.pattern.incidence(p) {
            let tuple = &self.pattern.tuples(r)[i];
            buf.clear();
            for &x in tuple {
                let img = state.map[x];
                if img == UNSET {
                    break;
                }
                buf.push(img);
            }
            if buf.len() == tuple.len() && !self.target.holds(r, &buf) {
                return false;
            }
        }
        for &(r, i) in self.target.incidence(t) {
            let tuple = &self.target.tuples(r)[i];
            buf.clear();
            for &x in tuple {
                let pre = state.inverse[x];
                if pre == UNSET {
                    break;
                }
                buf.push(pre);
            }
            if buf.len() == tuple.len() && !self.pattern.holds(r, &buf) {
                return false;
            }
        }
        true
    }

    /// Collects embeddings in search order, stopping after `limit` if given.
    pub fn collect(&self, limit: Option<usize>) -> Vec<Embedding> {
        let mut out = Vec::new();
        if limit == Some(0) {
            return out;
        }
        self.run(|m| {
            out.push(Embedding::new(m.to_vec()));
            if limit.is_some_and(|l| out.len() >= l) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        out
    }

    pub fn first(&self) -> Option<Embedding> {
        self.collect(Some(1)).pop()
    }

    pub fn exists(&self) -> bool {
        self.first().is_some()
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        self.run(|_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }
}

struct State {
    map: Vec<usize>,
    inverse: Vec<usize>,
}

/// Induced embeddings of `a` into `b`, lexicographic in the image sequence.
pub fn find_embeddings(a: &Structure, b: &Structure, limit: Option<usize>) -> Result<Vec<Embedding>> {
    Ok(Matcher::new(a, b)?.collect(limit))
}

/// Whether `a` embeds into `b` with the given vertices pinned.
pub fn embeds_pinned(a: &Structure, b: &Structure, pins: &[(usize, usize)]) -> Result<bool> {
    let mut m = Matcher::new(a, b)?;
    for &(p, t) in pins {
        m = m.pin(p, t);
    }
    Ok(m.connected_order().exists())
}

/// A bijective induced embedding `a -> b`, if the two are isomorphic.
pub fn are_isomorphic(a: &Structure, b: &Structure) -> Result<Option<Embedding>> {
    a.signature().ensure_same(b.signature())?;
    if a.size() != b.size() {
        return Ok(None);
    }
    for r in 0..a.signature().len() {
        if a.tuples(r).len() != b.tuples(r).len() {
            return Ok(None);
        }
    }
    let (ca, cb) = refine_jointly(a, b);
    let mut hist_a = ca.clone();
    let mut hist_b = cb.clone();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return Ok(None);
    }
    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in cb.iter().enumerate() {
        classes.entry(c).or_default().push(v);
    }
    let mut m = Matcher::new(a, b)?;
    for (v, c) in ca.iter().enumerate() {
        m = m.allow(v, classes[c].clone());
    }
    Ok(m.connected_order().first())
}

/// Colour refinement run on both structures with a shared colour table, so
/// that colour ids are comparable across them.
fn refine_jointly(a: &Structure, b: &Structure) -> (Vec<usize>, Vec<usize>) {
    let mut table: HashMap<Vec<usize>, usize> = HashMap::new();
    let colour = |key: Vec<usize>, table: &mut HashMap<Vec<usize>, usize>| {
        let next = table.len();
        *table.entry(key).or_insert(next)
    };
    let initial = |s: &Structure, table: &mut HashMap<Vec<usize>, usize>| -> Vec<usize> {
        (0..s.size())
            .map(|v| {
                let mut key: Vec<Vec<usize>> = s
                    .incidence(v)
                    .iter()
                    .map(|&(r, i)| {
                        let t = &s.tuples(r)[i];
                        let mut k = vec![r];
                        k.extend(t.iter().map(|&x| usize::from(x == v)));
                        k.extend(t.iter().map(|&x| t.iter().position(|&y| y == x).unwrap()));
                        k
                    })
                    .collect();
                key.sort();
                let flat: Vec<usize> = key
                    .into_iter()
                    .flat_map(|k| std::iter::once(k.len()).chain(k))
                    .collect();
                colour(flat, table)
            })
            .collect()
    };
    let mut ca = initial(a, &mut table);
    let mut cb = initial(b, &mut table);
    let distinct = |c: &[usize], d: &[usize]| {
        let mut all: Vec<usize> = c.iter().chain(d).copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    let mut classes = distinct(&ca, &cb);
    for _ in 0..a.size().max(1) {
        let mut next_table: HashMap<Vec<usize>, usize> = HashMap::new();
        let step = |s: &Structure, c: &[usize], table: &mut HashMap<Vec<usize>, usize>| -> Vec<usize> {
            (0..s.size())
                .map(|v| {
                    let mut key: Vec<Vec<usize>> = s
                        .incidence(v)
                        .iter()
                        .map(|&(r, i)| {
                            let t = &s.tuples(r)[i];
                            let mut k = vec![r];
                            k.extend(t.iter().map(|&x| if x == v { usize::MAX } else { c[x] }));
                            k
                        })
                        .collect();
                    key.sort();
                    let mut flat = vec![c[v]];
                    flat.extend(key.into_iter().flat_map(|k| std::iter::once(k.len()).chain(k)));
                    let next = table.len();
                    *table.entry(flat).or_insert(next)
                })
                .collect()
        };
        let na = step(a, &ca, &mut next_table);
        let nb = step(b, &cb, &mut next_table);
        let now = distinct(&na, &nb);
        ca = na;
        cb = nb;
        if now == classes {
            break;
        }
        classes = now;
    }
    (ca, cb)
}
