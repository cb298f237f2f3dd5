//! Regenerates `include/splp.h` from the `extern "C"` surface.

use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("SPLP_H".into()),
        cpp_compat: true,
        documentation: true,
        autogen_warning: Some(
            "/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */".into(),
        ),
        usize_is_size_t: true,
        // cbindgen cannot evaluate `usize::MAX`, so the sentinel is spelled out.
        after_includes: Some(
            "\n/** Anchor slot value for a community without an anchor. */\n#define SPLP_NO_ANCHOR SIZE_MAX".into(),
        ),
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            rename_variants: cbindgen::RenameRule::ScreamingSnakeCase,
            ..Default::default()
        },
        ..Default::default()
    };

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("generate C header")
        .write_to_file(crate_dir.join("include").join("splp.h"));
}
