fn main() {
    // The system OpenBLAS provides both the BLAS/LAPACK and the CBLAS
    // symbols needed by the linear-algebra stack; make sure the final link
    // pulls it in even when the provider crate's directive is not forwarded.
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu/openblas-pthread");
    println!("cargo:rustc-link-lib=openblas");
}
