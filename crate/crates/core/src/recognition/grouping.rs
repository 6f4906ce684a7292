use super::LinkHypothesis;
use crate::geom::{self, Aabb};
use crate::sketch::Stroke;
use crate::Id;

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so the representative is deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Partition ink strokes into links: connected components of the relation
/// "minimum polyline distance <= eps". Gesture strokes are ignored.
///
/// The result is sorted by lowest member stroke id, which is also the link
/// id. Color indices run round-robin over the 12-entry palette.
pub fn group_links<'a>(
    strokes: impl IntoIterator<Item = &'a Stroke>,
    eps: f64,
) -> Vec<LinkHypothesis> {
    let mut ink: Vec<&Stroke> = strokes.into_iter().filter(|s| s.is_ink()).collect();
    ink.sort_by_key(|s| s.id);
    let boxes: Vec<Aabb> = ink
        .iter()
        .map(|s| Aabb::from_points(&s.points).unwrap())
        .collect();

    let mut uf = UnionFind::new(ink.len());
    for i in 0..ink.len() {
        for j in i + 1..ink.len() {
            if boxes[i].distance(&boxes[j]) > eps || uf.find(i) == uf.find(j) {
                continue;
            }
            if geom::polyline_distance(&ink[i].points, &ink[j].points) <= eps {
                uf.union(i, j);
            }
        }
    }

    let mut groups: Vec<Vec<Id>> = Vec::new();
    let mut slot = vec![usize::MAX; ink.len()];
    for (i, stroke) in ink.iter().enumerate() {
        let root = uf.find(i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(stroke.id);
    }
    // strokes are visited in id order, so each group is sorted and groups are
    // ordered by their first (lowest) member
    groups
        .into_iter()
        .enumerate()
        .map(|(k, strokes)| LinkHypothesis {
            id: strokes[0],
            strokes,
            color: (k % super::PALETTE.len()) as u8,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::sketch::StrokeMode;

    fn line(id: u64, a: (f64, f64), b: (f64, f64)) -> Stroke {
        Stroke::new(
            Id(id),
            StrokeMode::Ink,
            vec![Point2::new(a.0, a.1), Point2::new(b.0, b.1)],
            vec![0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn shared_endpoint_is_one_link() {
        let s = [
            line(1, (0.0, 0.0), (1.0, 0.0)),
            line(2, (1.0, 0.0), (1.0, 1.0)),
        ];
        let links = group_links(&s, 0.01);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].strokes, vec![Id(1), Id(2)]);
    }

    #[test]
    fn far_strokes_stay_apart() {
        let eps = 0.01;
        let s = [
            line(1, (0.0, 0.0), (1.0, 0.0)),
            line(2, (0.0, 10.0 * eps), (1.0, 10.0 * eps)),
        ];
        let links = group_links(&s, eps);
        assert_eq!(links.len(), 2);
        assert_eq!((links[0].color, links[1].color), (0, 1));
    }

    #[test]
    fn transitive_chain() {
        let s = [
            line(1, (0.0, 0.0), (1.0, 0.0)),
            line(2, (1.0, 0.0), (2.0, 0.0)),
            line(3, (2.0, 0.0), (3.0, 0.0)),
        ];
        let links = group_links(&s, 0.001);
        assert_eq!(links.len(), 1);
    }

    #[test]
    fn gestures_ignored() {
        let mut g = line(2, (0.0, 0.0), (1.0, 0.0));
        g.mode = StrokeMode::Gesture;
        let s = [line(1, (0.0, 0.0), (1.0, 0.0)), g];
        let links = group_links(&s, 0.1);
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].strokes, vec![Id(1)]);
    }

    #[test]
    fn palette_wraps() {
        let s: Vec<_> = (0..14)
            .map(|k| line(k + 1, (k as f64 * 10.0, 0.0), (k as f64 * 10.0 + 1.0, 0.0)))
            .collect();
        let links = group_links(&s, 0.5);
        assert_eq!(links.len(), 14);
        assert_eq!(links[12].color, 0);
        assert_eq!(links[13].color, 1);
    }
}
