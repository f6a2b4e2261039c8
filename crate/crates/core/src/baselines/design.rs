use rand::Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    inv = out;
    inv
}

/// `n` points of a Halton sequence in `[0,1)^d` with a random
/// Cranley-Patterson shift per dimension.
pub fn shifted_halton<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(d <= PRIMES.len(), "Halton design supports up to {} dimensions", PRIMES.len());
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let v = radical_inverse(i, PRIMES[j]) + shift[j];
                    v - v.floor()
                })
                .collect()
        })
        .collect()
}
