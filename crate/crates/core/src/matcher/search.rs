//! The three search strategies over a [`MatchContext`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::assignment::min_cost_assignment;
use super::context::MatchContext;
use super::signature::Signature;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

use crate::rdf::Term;

pub(crate) type Map = Vec<Option<usize>>;

/// Every partial injection, in the order: left nodes by label, each trying
/// right nodes by label and then "unmapped". The first minimum wins.
pub(crate) fn exhaustive(ctx: &MatchContext, limit: usize) -> Result<(Map, usize)> {
    let (n1, n2) = (ctx.left.len(), ctx.right.len());
    if n1 > limit || n2 > limit {
        return Err(Error::InstanceTooLarge {
            left: n1,
            right: n2,
            limit,
        });
    }
    let mut map = vec![None; n1];
    let mut used = vec![false; n2];
    let mut best: Option<(Map, usize)> = None;
    fn go(
        ctx: &MatchContext,
        depth: usize,
        map: &mut Map,
        used: &mut [bool],
        best: &mut Option<(Map, usize)>,
    ) {
        if depth == map.len() {
            let cost = ctx.cost(map);
            if best.as_ref().map_or(true, |(_, b)| cost < *b) {
                *best = Some((map.clone(), cost));
            }
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                map[depth] = Some(k);
                go(ctx, depth + 1, map, used, best);
                used[k] = false;
            }
        }
        map[depth] = None;
        go(ctx, depth + 1, map, used, best);
    }
    go(ctx, 0, &mut map, &mut used, &mut best);
    Ok(best.expect("at least the empty mapping is enumerated"))
}

/// Branch and bound over total injections (requires n1 <= n2). A pair's
/// distance is final once it and all of its left neighbours are assigned;
/// finished pairs give the lower bound.
pub(crate) fn branch_and_bound(ctx: &MatchContext) -> (Map, usize) {
    let (n1, n2) = (ctx.left.len(), ctx.right.len());
    debug_assert!(n1 <= n2);
    // settle[d]: left nodes whose distance becomes final after assigning node d
    let mut settle = vec![Vec::new(); n1];
    for i in 0..n1 {
        let last = ctx.left.neighbors[i].iter().copied().chain([i]).max().unwrap_or(i);
        settle[last].push(i);
    }
    struct State<'a> {
        ctx: &'a MatchContext,
        settle: Vec<Vec<usize>>,
        map: Map,
        used: Vec<bool>,
        best: Option<(Map, usize)>,
    }
    fn go(st: &mut State, depth: usize, partial: usize) {
        if let Some((_, b)) = &st.best {
            if partial >= *b {
                return;
            }
        }
        if depth == st.map.len() {
            let unused: usize = st
                .used
                .iter()
                .zip(&st.ctx.right.raw_len)
                .filter(|(u, _)| !**u)
                .map(|(_, n)| n)
                .sum();
            let total = partial + unused;
            if st.best.as_ref().map_or(true, |(_, b)| total < *b) {
                st.best = Some((st.map.clone(), total));
            }
            return;
        }
        for k in 0..st.used.len() {
            if st.used[k] {
                continue;
            }
            st.used[k] = true;
            st.map[depth] = Some(k);
            let mut add = 0;
            for idx in 0..st.settle[depth].len() {
                let i = st.settle[depth][idx];
                add += st.ctx.dist(i, st.map[i].expect("assigned"), &st.map);
            }
            go(st, depth + 1, partial + add);
            st.map[depth] = None;
            st.used[k] = false;
        }
    }
    let mut st = State {
        ctx,
        settle,
        map: vec![None; n1],
        used: vec![false; n2],
        best: None,
    };
    go(&mut st, 0, 0);
    let (map, cost) = st.best.expect("n1 <= n2 admits a total injection");
    debug_assert_eq!(cost, ctx.cost(&map));
    (map, cost)
}

/// Exact when no triple joins two blank nodes: distances do not depend on
/// the mapping, so a single assignment over the distance matrix is optimal.
pub(crate) fn assignment(ctx: &MatchContext) -> (Map, usize) {
    let (n1, n2) = (ctx.left.len(), ctx.right.len());
    debug_assert!(n1 <= n2);
    let none = vec![None; n1];
    let matrix: Vec<Vec<i64>> = (0..n1)
        .map(|i| (0..n2).map(|k| ctx.dist(i, k, &none) as i64).collect())
        .collect();
    let map: Map = min_cost_assignment(&matrix).into_iter().map(Some).collect();
    let cost = ctx.cost(&map);
    (map, cost)
}

/// Signature seeding, assignment on the residue, then swap hill-climbing.
/// Returns an upper bound on the optimum.
pub(crate) fn refinement(
    ctx: &MatchContext,
    left_sigs: &BTreeMap<Term, Signature>,
    right_sigs: &BTreeMap<Term, Signature>,
    max_rounds: usize,
    seed: u64,
) -> (Map, usize) {
    let (n1, n2) = (ctx.left.len(), ctx.right.len());
    debug_assert!(n1 <= n2);
    let mut map: Map = vec![None; n1];
    let mut used = vec![false; n2];

    // equal colours first, pairing members in label order
    let mut by_color: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, label) in ctx.left.labels.iter().enumerate() {
        by_color.entry(left_sigs[label].color.as_str()).or_default().0.push(i);
    }
    for (k, label) in ctx.right.labels.iter().enumerate() {
        by_color.entry(right_sigs[label].color.as_str()).or_default().1.push(k);
    }
    for (lefts, rights) in by_color.values() {
        for (&i, &k) in lefts.iter().zip(rights) {
            map[i] = Some(k);
            used[k] = true;
        }
    }

    let rest_l: Vec<usize> = (0..n1).filter(|&i| map[i].is_none()).collect();
    let rest_r: Vec<usize> = (0..n2).filter(|&k| !used[k]).collect();
    if !rest_l.is_empty() {
        let matrix: Vec<Vec<i64>> = rest_l
            .iter()
            .map(|&i| rest_r.iter().map(|&k| ctx.dist(i, k, &map) as i64).collect())
            .collect();
        for (row, col) in min_cost_assignment(&matrix).into_iter().enumerate() {
            map[rest_l[row]] = Some(rest_r[col]);
            used[rest_r[col]] = true;
        }
    }

    let mut cost = ctx.cost(&map);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    #[derive(Clone, Copy)]
    enum Move {
        Swap(usize, usize),
        Reassign(usize, usize),
    }
    for _ in 0..max_rounds {
        let mut moves: Vec<Move> = Vec::new();
        for i in 0..n1 {
            for j in i + 1..n1 {
                moves.push(Move::Swap(i, j));
            }
            for k in 0..n2 {
                if !used[k] {
                    moves.push(Move::Reassign(i, k));
                }
            }
        }
        moves.shuffle(&mut rng);
        let mut improved = false;
        for mv in moves {
            let (a, b) = match mv {
                Move::Swap(i, j) => (i, Some(j)),
                Move::Reassign(i, _) => (i, None),
            };
            if let Move::Reassign(_, k) = mv {
                if used[k] {
                    continue;
                }
            }
            let affected = affected_nodes(ctx, a, b);
            let before = local_cost(ctx, &map, &affected);
            let undo = map.clone();
            let mut penalty_delta: i64 = 0;
            match mv {
                Move::Swap(i, j) => map.swap(i, j),
                Move::Reassign(i, k) => {
                    let old = map[i];
                    map[i] = Some(k);
                    penalty_delta -= ctx.right.raw_len[k] as i64;
                    if let Some(o) = old {
                        penalty_delta += ctx.right.raw_len[o] as i64;
                    }
                }
            }
            let after = local_cost(ctx, &map, &affected);
            let delta = after as i64 - before as i64 + penalty_delta;
            if delta < 0 {
                if let Move::Reassign(i, k) = mv {
                    if let Some(o) = undo[i] {
                        used[o] = false;
                    }
                    used[k] = true;
                }
                cost = (cost as i64 + delta) as usize;
                improved = true;
            } else {
                map = undo;
            }
        }
        if !improved {
            break;
        }
    }
    debug_assert_eq!(cost, ctx.cost(&map));
    if ctx.empty_cost() < cost {
        return (vec![None; n1], ctx.empty_cost());
    }
    (map, cost)
}

fn affected_nodes(ctx: &MatchContext, a: usize, b: Option<usize>) -> Vec<usize> {
    let mut out = vec![a];
    out.extend(&ctx.left.neighbors[a]);
    if let Some(b) = b {
        out.push(b);
        out.extend(&ctx.left.neighbors[b]);
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn local_cost(ctx: &MatchContext, map: &Map, nodes: &[usize]) -> usize {
    nodes
        .iter()
        .map(|&i| match map[i] {
            Some(k) => ctx.dist(i, k, map),
            None => ctx.left.raw_len[i],
        })
        .sum()
}
