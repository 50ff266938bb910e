//! Counter-based uniform stream.
//!
//! Every draw is a pure function of `(seed, path, interval, draw index)`,
//! so results are reproducible independently of worker count, evaluation
//! order and chunking. The mixer is splitmix64 applied to a running hash
//! of the key words.

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn hash4(a: u64, b: u64, c: u64, d: u64) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for v in [a, b, c, d] {
        h = splitmix(h ^ v);
        h = h
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(0x632b_e59b_d9b4_e019);
    }
    splitmix(h)
}

/// A keyed stream of uniforms for one `(seed, path, interval)` cell.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    path: u64,
    interval: u64,
    draw: u64,
}

impl CounterRng {
    pub fn new(seed: u64, path: u64, interval: u64) -> Self {
        Self {
            seed,
            path,
            interval,
            draw: 0,
        }
    }

    /// Next uniform, strictly inside (0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        let w = hash4(self.seed, self.path, self.interval, self.draw);
        self.draw += 1;
        ((w >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller; consumes two uniforms.
    pub fn next_standard_normal(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
