//! Synthetic granular rock: overlapping spherical grains with isolated
//! micro-pores carved inside them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use msrec_core::volume::{linear_index, voxel_count};
use msrec_core::{BinaryVolume, BitDepth, Dims, Error, GrayVolume, Result, Volume, PORE, ROCK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpherePack {
    pub dims: Dims,
    pub scale_um: f64,
    /// Grain radii in voxels, drawn uniformly from `[lo, hi]`.
    pub grain_radius: [f64; 2],
    /// Grains are added until the pore fraction drops to this value.
    pub porosity: f64,
    /// Micro-pores to carve inside grains.
    pub micropores: usize,
    /// Micro-pore radii in voxels.
    pub micropore_radius: [f64; 2],
    /// Emit an 8-bit image (dark pores) instead of a binary one.
    pub gray: bool,
    /// Half-width of the uniform intensity noise in gray output.
    pub noise: u8,
    pub seed: u64,
}

impl Default for SpherePack {
    fn default() -> Self {
        SpherePack {
            dims: [104, 104, 200],
            scale_um: 2.35,
            grain_radius: [8.0, 14.0],
            porosity: 0.3,
            micropores: 300,
            micropore_radius: [0.5, 1.5],
            gray: false,
            noise: 20,
            seed: 0,
        }
    }
}

const PORE_LEVEL: i32 = 70;
const ROCK_LEVEL: i32 = 170;

/// Offsets inside a ball of radius `r` voxels.
fn ball(r: f64) -> Vec<[i64; 3]> {
    let reach = r.floor() as i64;
    let mut out = Vec::new();
    for dz in -reach..=reach {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy + dz * dz) as f64) <= r * r {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

impl SpherePack {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(format!("sphere_pack: {msg}")));
        if self.dims.contains(&0) {
            return bad("dims must be positive");
        }
        if !(self.scale_um.is_finite() && self.scale_um > 0.0) {
            return bad("scale_um must be positive");
        }
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return bad("porosity must lie in (0, 1)");
        }
        for (name, [lo, hi]) in [
            ("grain_radius", self.grain_radius),
            ("micropore_radius", self.micropore_radius),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return bad(&format!("{name} must be an ordered pair of positive radii"));
            }
        }
        Ok(())
    }

    pub fn generate_binary(&self) -> Result<BinaryVolume> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let dims = self.dims;
        let n = voxel_count(dims);
        let mut data = vec![PORE; n];
        let mut pores = n;
        let target = (self.porosity * n as f64).floor() as usize;

        while pores > target {
            // centres may sit outside the box so coverage near the faces matches the interior
            let reach = self.grain_radius[1];
            let c: [f64; 3] = [0, 1, 2].map(|a| rng.gen_range(-reach..dims[a] as f64 + reach));
            let r = rng.gen_range(self.grain_radius[0]..=self.grain_radius[1]);
            if (0..3).any(|a| c[a] + r < 0.0 || c[a] - r > dims[a] as f64) {
                continue;
            }
            let lo = [0, 1, 2].map(|a| (c[a] - r).floor().max(0.0) as usize);
            let hi = [0, 1, 2].map(|a| ((c[a] + r).ceil() as usize).min(dims[a] - 1));
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let d = [x, y, z]
                            .iter()
                            .zip(&c)
                            .map(|(&p, &q)| (p as f64 + 0.5 - q).powi(2))
                            .sum::<f64>();
                        let i = linear_index(dims, x, y, z);
                        if d <= r * r && data[i] == PORE {
                            data[i] = ROCK;
                            pores -= 1;
                        }
                    }
                }
            }
        }

        self.carve_micropores(&mut data, &mut rng);
        BinaryVolume::new(dims, self.scale_um, data)
    }

    /// Carves balls whose Chebyshev-2 neighbourhood is all rock, so each
    /// stays an isolated component under 26-connectivity.
    fn carve_micropores(&self, data: &mut [u8], rng: &mut ChaCha8Rng) {
        const GUARD: i64 = 2;
        let dims = self.dims;
        let mut placed = 0;
        let mut attempts = 0;
        while placed < self.micropores && attempts < self.micropores * 50 {
            attempts += 1;
            let r = rng.gen_range(self.micropore_radius[0]..=self.micropore_radius[1]);
            let c = [0, 1, 2].map(|a| rng.gen_range(0..dims[a]) as i64);
            let shape = ball(r);
            let reach = r.floor() as i64 + GUARD;
            let inside = (0..3).all(|a| c[a] - reach >= 0 && c[a] + reach < dims[a] as i64);
            if !inside {
                continue;
            }
            let clear = (-reach..=reach).all(|dz| {
                (-reach..=reach).all(|dy| {
                    (-reach..=reach).all(|dx| {
                        let [x, y, z] = [c[0] + dx, c[1] + dy, c[2] + dz].map(|v| v as usize);
                        data[linear_index(dims, x, y, z)] == ROCK
                    })
                })
            });
            if !clear {
                continue;
            }
            for [dx, dy, dz] in shape {
                let [x, y, z] = [c[0] + dx, c[1] + dy, c[2] + dz].map(|v| v as usize);
                data[linear_index(dims, x, y, z)] = PORE;
            }
            placed += 1;
        }
        if placed < self.micropores {
            log::warn!(
                "sphere pack: carved {placed} of {} micro-pores",
                self.micropores
            );
        }
    }

    /// Binary or 8-bit gray output depending on [`SpherePack::gray`].
    pub fn generate(&self) -> Result<Volume> {
        let binary = self.generate_binary()?;
        if !self.gray {
            return Ok(Volume::Binary(binary));
        }
        // separate stream so the structure does not depend on the noise
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let noise = self.noise as i32;
        let data = binary
            .data()
            .iter()
            .map(|&v| {
                let base = if v == PORE { PORE_LEVEL } else { ROCK_LEVEL };
                (base + rng.gen_range(-noise..=noise)).clamp(0, 255) as u16
            })
            .collect();
        Ok(Volume::Gray(GrayVolume::new(
            self.dims,
            self.scale_um,
            BitDepth::Eight,
            data,
        )?))
    }
}
