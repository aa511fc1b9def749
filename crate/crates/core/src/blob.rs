//! Connected-component labeling and per-blob statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::frame::BinaryMask;

/// Which neighbours of a pixel count as connected to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u8", into = "u8"))]
pub enum Connectivity {
    /// N, S, E, W.
    Four,
    /// All eight neighbours.
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = &'static str;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err("connectivity must be 4 or 8"),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// A labeled connected component.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Blob {
    /// 1-based, in raster-scan order of first pixel.
    pub label: u32,
    pub area: usize,
    /// Mean pixel index `(x, y)`.
    pub centroid: (f64, f64),
    /// Inclusive `(x_min, y_min, x_max, y_max)`.
    pub bbox: (usize, usize, usize, usize),
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn with_capacity(n: usize) -> Self {
        DisjointSet {
            parent: Vec::with_capacity(n),
        }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// The smaller root wins, so every root is the first provisional label of its set.
    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
        keep
    }
}

#[derive(Clone)]
struct Accum {
    area: usize,
    sum_x: u64,
    sum_y: u64,
    x_min: usize,
    y_min: usize,
    x_max: usize,
    y_max: usize,
}

impl Accum {
    const EMPTY: Accum = Accum {
        area: 0,
        sum_x: 0,
        sum_y: 0,
        x_min: usize::MAX,
        y_min: usize::MAX,
        x_max: 0,
        y_max: 0,
    };

    fn add(&mut self, x: usize, y: usize) {
        self.area += 1;
        self.sum_x += x as u64;
        self.sum_y += y as u64;
        self.x_min = self.x_min.min(x);
        self.y_min = self.y_min.min(y);
        self.x_max = self.x_max.max(x);
        self.y_max = self.y_max.max(y);
    }
}

/// Two-pass labeling with union-find label equivalence.
///
/// Labels follow raster-scan first-encounter order starting at 1. An empty
/// mask yields an empty list.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Blob> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; w * h];
    let mut sets = DisjointSet::with_capacity(64);

    // First pass: provisional labels from already-visited neighbours.
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut current = NONE;
            let join = |n: u32, current: &mut u32, sets: &mut DisjointSet| {
                if n == NONE {
                    return;
                }
                *current = if *current == NONE { n } else { sets.union(*current, n) };
            };
            if x > 0 {
                join(labels[i - 1], &mut current, &mut sets);
            }
            if y > 0 {
                let up = i - w;
                join(labels[up], &mut current, &mut sets);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        join(labels[up - 1], &mut current, &mut sets);
                    }
                    if x + 1 < w {
                        join(labels[up + 1], &mut current, &mut sets);
                    }
                }
            }
            labels[i] = if current == NONE { sets.make() } else { current };
        }
    }

    // Second pass: resolve roots and accumulate statistics. Roots are visited
    // in increasing order of their first pixel, which fixes the final label.
    let mut final_label = vec![NONE; sets.parent.len()];
    let mut accums: Vec<Accum> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let provisional = labels[y * w + x];
            if provisional == NONE {
                continue;
            }
            let root = sets.find(provisional) as usize;
            if final_label[root] == NONE {
                final_label[root] = accums.len() as u32;
                accums.push(Accum::EMPTY);
            }
            accums[final_label[root] as usize].add(x, y);
        }
    }

    accums
        .into_iter()
        .enumerate()
        .map(|(i, a)| Blob {
            label: i as u32 + 1,
            area: a.area,
            centroid: (a.sum_x as f64 / a.area as f64, a.sum_y as f64 / a.area as f64),
            bbox: (a.x_min, a.y_min, a.x_max, a.y_max),
        })
        .collect()
}

/// Keeps blobs with `area >= min_area`, preserving order.
pub fn filter_blobs(blobs: Vec<Blob>, min_area: usize) -> Vec<Blob> {
    blobs.into_iter().filter(|b| b.area >= min_area).collect()
}

/// Largest area; ties go to the smaller label.
pub fn largest_blob(blobs: &[Blob]) -> Option<&Blob> {
    blobs
        .iter()
        .min_by(|a, b| b.area.cmp(&a.area).then(a.label.cmp(&b.label)))
}
