//! Wall-clock timing. `wasm32-unknown-unknown` has no clock, so there every
//! reading is zero.

#[derive(Clone, Copy)]
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub fn elapsed_ms(&self) -> u128 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_millis();
        #[cfg(target_arch = "wasm32")]
        0
    }
}
