//! Per-thread heap accounting.
//!
//! Register [`CountingAlloc`] as the global allocator of a binary to make
//! [`measure`] report real numbers; without it every count stays zero.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;

thread_local! {
    static CURRENT: Cell<isize> = const { Cell::new(0) };
    static PEAK: Cell<isize> = const { Cell::new(0) };
}

pub struct CountingAlloc;

fn record(delta: isize) {
    let _ = CURRENT.try_with(|cur| {
        let now = cur.get() + delta;
        cur.set(now);
        let _ = PEAK.try_with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            record(layout.size() as isize);
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc_zeroed(layout);
        if !p.is_null() {
            record(layout.size() as isize);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        record(-(layout.size() as isize));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            record(new_size as isize - layout.size() as isize);
        }
        p
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct AllocStats {
    /// Highest live heap above the starting level.
    pub peak_bytes: usize,
    /// Live heap at the end above the starting level (the result).
    pub retained_bytes: usize,
}

impl AllocStats {
    /// Scratch memory: peak minus what the result keeps.
    pub fn aux_bytes(&self) -> usize {
        self.peak_bytes.saturating_sub(self.retained_bytes)
    }
}

/// Runs `f` on the current thread and reports its heap profile.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, AllocStats) {
    let start = CURRENT.with(Cell::get);
    let saved_peak = PEAK.with(|p| p.replace(start));
    let out = f();
    let end = CURRENT.with(Cell::get);
    let peak = PEAK.with(|p| p.replace(saved_peak.max(p.get())));
    let stats = AllocStats {
        peak_bytes: (peak - start).max(0) as usize,
        retained_bytes: (end - start).max(0) as usize,
    };
    (out, stats)
}

/// Whether the counting allocator is installed in this binary.
pub fn tracking_enabled() -> bool {
    let (_, stats) = measure(|| std::hint::black_box(vec![0u8; 64]));
    stats.retained_bytes >= 64
}

#[cfg(test)]
#[global_allocator]
static GLOBAL: CountingAlloc = CountingAlloc;
