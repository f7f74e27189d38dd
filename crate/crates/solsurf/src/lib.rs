pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

/// Keeps large field buffers on the heap instead of fresh mmap regions.
/// Fields on refined grids run to 100 MB and are allocated and dropped
/// thousands of times per suite; with mmap each one costs a round of page
/// faults.
#[cfg(all(target_os = "linux", target_env = "gnu"))]
pub fn tune_allocator() {
    const M_TRIM_THRESHOLD: i32 = -1;
    const M_MMAP_MAX: i32 = -4;
    extern "C" {
        fn mallopt(param: i32, value: i32) -> i32;
    }
    // SAFETY: mallopt only adjusts allocator parameters; it is called before
    // any worker threads exist.
    unsafe {
        mallopt(M_MMAP_MAX, 0);
        mallopt(M_TRIM_THRESHOLD, i32::MAX);
    }
}

#[cfg(not(all(target_os = "linux", target_env = "gnu")))]
pub fn tune_allocator() {}
