//! Row-run representation of a mask region and union-find labelling over runs.

use crate::mask::{as_bytes, BinaryMask, BoundingBox};

/// Index of the first pixel in `row[from..to]` equal to `value`, or `to`.
pub(crate) fn find(row: &[bool], from: usize, to: usize, value: bool) -> usize {
    memchr::memchr(value as u8, &as_bytes(row)[from..to]).map_or(to, |i| from + i)
}

/// Half-open horizontal interval `[x0, x1)` on one row, in frame coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Run {
    pub x0: u32,
    pub x1: u32,
}

/// Runs of the rows `y0..y0 + rows()` of a window.
#[derive(Clone, Debug, Default)]
pub(crate) struct RunSet {
    pub y0: u32,
    row_start: Vec<usize>,
    pub runs: Vec<Run>,
}

impl RunSet {
    /// Runs of pixels equal to `value` inside `roi`.
    pub fn scan(mask: &BinaryMask, roi: &BoundingBox, value: bool) -> RunSet {
        let w = mask.width() as usize;
        let px = mask.pixels();
        let mut set = RunSet {
            y0: roi.y0,
            row_start: Vec::with_capacity(roi.height() as usize + 1),
            runs: Vec::new(),
        };
        for y in roi.y0..roi.y1 {
            set.row_start.push(set.runs.len());
            let row = &px[y as usize * w..(y as usize + 1) * w];
            let (lo, hi) = (roi.x0 as usize, roi.x1 as usize);
            let mut x = lo;
            while x < hi {
                let start = find(row, x, hi, value);
                if start == hi {
                    break;
                }
                let end = find(row, start, hi, !value);
                set.runs.push(Run {
                    x0: start as u32,
                    x1: end as u32,
                });
                x = end;
            }
        }
        set.row_start.push(set.runs.len());
        set
    }

    pub fn rows(&self) -> usize {
        self.row_start.len().saturating_sub(1)
    }

    pub fn row(&self, i: usize) -> &[Run] {
        &self.runs[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Index of the first run of row `i`.
    pub fn row_offset(&self, i: usize) -> usize {
        self.row_start[i]
    }

    /// Connected components of the runs. With `diagonal`, runs touching at a
    /// corner are connected (8-connectivity), otherwise only overlapping runs
    /// are (4-connectivity). Returns a label per run, numbered from 0 in order
    /// of each component's first run, and the number of labels.
    pub fn label(&self, diagonal: bool) -> (Vec<u32>, usize) {
        let n = self.runs.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut i: u32) -> u32 {
            while parent[i as usize] != i {
                let p = parent[i as usize];
                parent[i as usize] = parent[p as usize];
                i = p;
            }
            i
        }
        let slack = u32::from(diagonal);
        for r in 1..self.rows() {
            let (above, below) = (self.row_offset(r - 1), self.row_offset(r));
            let (a_end, b_end) = (below, self.row_offset(r + 1));
            let (mut i, mut j) = (above, below);
            while i < a_end && j < b_end {
                let (a, b) = (self.runs[i], self.runs[j]);
                if a.x0 < b.x1 + slack && b.x0 < a.x1 + slack {
                    let (ra, rb) = (find(&mut parent, i as u32), find(&mut parent, j as u32));
                    if ra != rb {
                        // keep the earlier run as root so labels follow scan order
                        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                        parent[hi as usize] = lo;
                    }
                }
                if a.x1 < b.x1 {
                    i += 1;
                } else {
                    j += 1;
                }
            }
        }
        let mut labels = vec![u32::MAX; n];
        let mut next = 0u32;
        for i in 0..n {
            let root = find(&mut parent, i as u32) as usize;
            if labels[root] == u32::MAX {
                labels[root] = next;
                next += 1;
            }
            labels[i] = labels[root];
        }
        (labels, next as usize)
    }

    /// Writes `value` over every run for which `keep` holds.
    pub fn paint(&self, mask: &mut BinaryMask, value: bool, mut keep: impl FnMut(usize) -> bool) {
        let w = mask.width() as usize;
        let px = mask.pixels_mut();
        for r in 0..self.rows() {
            let y = self.y0 as usize + r;
            for k in self.row_offset(r)..self.row_offset(r + 1) {
                if keep(k) {
                    let run = self.runs[k];
                    px[y * w + run.x0 as usize..y * w + run.x1 as usize].fill(value);
                }
            }
        }
    }

    /// Row index (within the set) of run `k`.
    #[cfg(test)]
    pub fn row_of(&self, k: usize) -> usize {
        self.row_start.partition_point(|&s| s <= k) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_and_label() {
        let m = BinaryMask::from_ascii(
            "##..#\n\
             .#..#\n\
             ..#..\n\
             .....\n\
             ##.##",
        );
        let roi = BoundingBox::full(5, 5);
        let set = RunSet::scan(&m, &roi, true);
        assert_eq!(set.rows(), 5);
        assert_eq!(set.row(0), &[Run { x0: 0, x1: 2 }, Run { x0: 4, x1: 5 }]);
        assert!(set.row(3).is_empty());
        let (labels, n8) = set.label(true);
        assert_eq!(n8, 4);
        assert_eq!(labels, vec![0, 1, 0, 1, 0, 2, 3]);
        let (_, n4) = set.label(false);
        assert_eq!(n4, 5);
        assert_eq!(set.row_of(4), 2);
    }

    #[test]
    fn find_matches_linear_search() {
        let row: Vec<bool> = (0..100).map(|i| i % 23 == 5 || (40..57).contains(&i)).collect();
        for from in 0..100 {
            for to in from..=100 {
                for value in [false, true] {
                    let expected = (from..to).find(|&i| row[i] == value).unwrap_or(to);
                    assert_eq!(find(&row, from, to, value), expected);
                }
            }
        }
    }
}
