//! Small enumerators shared by several modules.

/// All set partitions of `{0..n}` in canonical form: blocks ordered by their
/// smallest element, elements ascending within a block.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    rec(0, n, &mut blocks, &mut out);
    out
}

/// Möbius function of the partition lattice from the discrete partition to a
/// partition with `k` blocks: `(-1)^(k-1) (k-1)!`.
pub fn mobius_weight(k: usize) -> i64 {
    let f: i64 = (1..k as i64).product();
    if k % 2 == 1 {
        f
    } else {
        -f
    }
}

/// Injective maps from `0..k` into `0..n`, as image vectors.
pub fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; n];
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(k, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(k, &mut cur, &mut used, &mut out);
    out
}

/// Integer partitions of `n` with parts at most `max`, largest part first.
pub fn partitions(n: i64, max: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    injections(n, n)
}
