fn main() {
    // Link against the system OpenBLAS, which bundles LAPACK.
    if let Ok(dir) = std::env::var("CUSPSTATS_OPENBLAS_DIR") {
        println!("cargo:rustc-link-search=native={dir}");
    } else {
        println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu/openblas-pthread");
        println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
    }
    println!("cargo:rustc-link-lib=openblas");
}
