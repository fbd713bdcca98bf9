//! Seeded 2D gradient noise.

use num_traits::Float;

/// Perlin-style gradient noise with a permutation table shuffled from a seed.
#[derive(Debug, Clone)]
pub struct GradientNoise<F> {
    perm: [u8; 512],
    _scalar: std::marker::PhantomData<F>,
}

const GRADIENTS: [(i8, i8); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lit<F: Float>(v: f64) -> F {
    F::from(v).unwrap_or_else(F::zero)
}

impl<F: Float> GradientNoise<F> {
    pub fn new(seed: u64) -> Self {
        let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut state = seed;
        for i in (1..256).rev() {
            let j = (splitmix64(&mut state) % (i as u64 + 1)) as usize;
            table.swap(i, j);
        }
        let perm = std::array::from_fn(|i| table[i & 255]);
        Self { perm, _scalar: std::marker::PhantomData }
    }

    fn gradient(&self, ix: i64, iy: i64) -> (F, F) {
        let h = self.perm[self.perm[(ix & 255) as usize] as usize + (iy & 255) as usize];
        let (gx, gy) = GRADIENTS[(h & 7) as usize];
        (lit(f64::from(gx)), lit(f64::from(gy)))
    }

    fn fade(t: F) -> F {
        t * t * t * (t * (t * lit(6.0) - lit(15.0)) + lit(10.0))
    }

    /// Roughly in [-1, 1].
    pub fn sample(&self, x: F, y: F) -> F {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0.to_i64().unwrap_or(0), y0.to_i64().unwrap_or(0));
        let dot = |cx: i64, cy: i64, dx: F, dy: F| {
            let (gx, gy) = self.gradient(ix + cx, iy + cy);
            gx * dx + gy * dy
        };
        let one = F::one();
        let n00 = dot(0, 0, fx, fy);
        let n10 = dot(1, 0, fx - one, fy);
        let n01 = dot(0, 1, fx, fy - one);
        let n11 = dot(1, 1, fx - one, fy - one);
        let (u, v) = (Self::fade(fx), Self::fade(fy));
        let a = n00 + u * (n10 - n00);
        let b = n01 + u * (n11 - n01);
        a + v * (b - a)
    }

    /// Two octaves mapped to [0, 1].
    pub fn fractal(&self, x: F, y: F, frequency: F) -> F {
        let two = lit::<F>(2.0);
        let half = lit::<F>(0.5);
        let v =
            self.sample(x * frequency, y * frequency) + half * self.sample(x * frequency * two, y * frequency * two);
        let scaled = v / lit(1.5);
        ((scaled + F::one()) * half).max(F::zero()).min(F::one())
    }
}
