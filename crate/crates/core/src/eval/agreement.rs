use serde::{Deserialize, Serialize};

use crate::dataset::AnnotationStore;

/// `1 - |I ∩ J| / |I ∪ J|`, with 1 for an empty union: two styles nobody
/// used share no evidence and count as fully distinct.
pub fn agreement_cell(intersection: usize, union: usize) -> f64 {
    if union == 0 {
        1.0
    } else {
        1.0 - intersection as f64 / union as f64
    }
}

/// Pairwise style distinctness among expert labels, upper triangle only.
///
/// Cell `(a, b)` compares the sets of images that received at least one
/// label of style `a` and of style `b`. The diagonal is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub styles: Vec<String>,
    /// Row-major; `None` below the diagonal.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl AgreementMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.cells[lo][hi].expect("upper triangle is filled")
    }
}

pub fn agreement_matrix(store: &AnnotationStore) -> AgreementMatrix {
    let l = store.styles().len();
    let mut inter = vec![vec![0usize; l]; l];
    let mut single = vec![0usize; l];
    for c in store.images() {
        let present: Vec<usize> = (0..l).filter(|&s| c.counts[s] > 0).collect();
        for &a in &present {
            single[a] += 1;
            for &b in &present {
                inter[a][b] += 1;
            }
        }
    }
    let mut cells = vec![vec![None; l]; l];
    for a in 0..l {
        cells[a][a] = Some(0.0);
        for b in a + 1..l {
            let union = single[a] + single[b] - inter[a][b];
            cells[a][b] = Some(agreement_cell(inter[a][b], union));
        }
    }
    AgreementMatrix {
        styles: store.styles().names().to_vec(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabelCounts;
    use crate::style::Styles;

    #[test]
    fn modern_traditional_cell() {
        assert!((agreement_cell(46, 100) - 0.54).abs() < 1e-12);
        assert_eq!(agreement_cell(0, 7), 1.0);
        assert_eq!(agreement_cell(9, 9), 0.0);
        assert_eq!(agreement_cell(0, 0), 1.0);
    }

    #[test]
    fn matrix_from_counts() {
        // Modern on {a, b, c}, Traditional on {b, c, d}: 2 / 4 shared.
        let rows = [
            ("a", [2, 0, 0, 0]),
            ("b", [1, 1, 0, 0]),
            ("c", [3, 2, 0, 0]),
            ("d", [0, 4, 0, 1]),
        ];
        let store = AnnotationStore::from_counts(
            Styles::default(),
            10,
            rows.iter().map(|(id, c)| LabelCounts {
                image_id: id.to_string(),
                counts: c.to_vec(),
            }),
        )
        .unwrap();
        let m = agreement_matrix(&store);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 3), 1.0);
        assert_eq!(m.get(1, 3), 1.0 - 1.0 / 3.0);
        // Cottage was never used.
        assert_eq!(m.get(2, 3), 1.0);
        assert!(m.cells[1][0].is_none());
    }
}
