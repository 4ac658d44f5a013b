/// Disjoint sets over `0..n` with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Component id per element, numbered in order of first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut ids = vec![usize::MAX; n];
        let mut out = Vec::with_capacity(n);
        let mut next = 0;
        for x in 0..n {
            let r = self.find(x);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            out.push(ids[r]);
        }
        out
    }

    /// Elements grouped by component, groups ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let labels = self.labels();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); count];
        for (x, l) in labels.into_iter().enumerate() {
            groups[l].push(x);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_labels() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(3, 4));
        assert!(uf.union(0, 4));
        assert!(!uf.union(3, 0));
        assert_eq!(uf.labels(), vec![0, 1, 2, 0, 0]);
        assert_eq!(uf.groups(), vec![vec![0, 3, 4], vec![1], vec![2]]);
    }
}
