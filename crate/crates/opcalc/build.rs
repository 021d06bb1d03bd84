use std::path::Path;

// The netlib system backend links `-lcblas`, but Debian-family images ship the
// CBLAS interface inside libopenblas without a libcblas.so alias. When that is
// the case, expose an alias from OUT_DIR so the final link resolves.
fn main() {
    let search_dirs = ["/usr/lib/x86_64-linux-gnu", "/usr/lib", "/usr/local/lib"];
    if search_dirs
        .iter()
        .any(|d| Path::new(d).join("libcblas.so").exists())
    {
        return;
    }
    for dir in search_dirs {
        let provider = Path::new(dir).join("libopenblas.so");
        if provider.exists() {
            let out = std::env::var("OUT_DIR").unwrap();
            let alias = Path::new(&out).join("libcblas.so");
            let _ = std::fs::remove_file(&alias);
            std::os::unix::fs::symlink(&provider, &alias).unwrap();
            println!("cargo:rustc-link-search=native={out}");
            return;
        }
    }
    println!("cargo:warning=no CBLAS provider found; linking may fail");
}
