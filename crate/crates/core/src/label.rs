//! Two-pass connected-component labelling with union-find equivalences.

use crate::volume::{BinaryVolume, Connectivity, LabelField, PORE};

/// Disjoint-set forest over provisional labels; the root of a set is always
/// its smallest member.
struct Equivalences {
    parent: Vec<u32>,
}

impl Equivalences {
    fn new() -> Self {
        // index 0 is the background sentinel
        Equivalences { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels the pore phase. Components are numbered `1..=K` in raster order of
/// their first voxel; rock is 0.
pub fn label_components(volume: &BinaryVolume, connectivity: Connectivity) -> LabelField {
    let dims = volume.dims();
    let [nx, ny, nz] = dims.map(|d| d as i64);
    let data = volume.data();
    let offsets = connectivity.backward_offsets();
    let mut labels = vec![0u32; data.len()];
    let mut eq = Equivalences::new();

    // First pass: provisional labels from already-visited neighbours.
    let mut idx = 0usize;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if data[idx] == PORE {
                    let mut current = 0u32;
                    for &[dx, dy, dz] in offsets {
                        let (qx, qy, qz) = (x + dx as i64, y + dy as i64, z + dz as i64);
                        if qx < 0 || qx >= nx || qy < 0 || qy >= ny || qz < 0 {
                            continue;
                        }
                        let q = (qx + nx * (qy + ny * qz)) as usize;
                        let l = labels[q];
                        if l == 0 {
                            continue;
                        }
                        current = if current == 0 {
                            eq.find(l)
                        } else {
                            eq.union(current, l)
                        };
                    }
                    labels[idx] = if current == 0 { eq.make() } else { current };
                }
                idx += 1;
            }
        }
    }

    // Second pass: resolve equivalences to contiguous labels in first-seen order.
    let mut final_label = vec![0u32; eq.parent.len()];
    let mut count = 0u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = eq.find(*l) as usize;
        if final_label[root] == 0 {
            count += 1;
            final_label[root] = count;
        }
        *l = final_label[root];
    }

    LabelField::from_parts(dims, labels, count as usize)
}
