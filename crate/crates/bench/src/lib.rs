//! Inputs for the benchmarks: a hand-written kernel-like model and a
//! generator for larger synthetic ones.

use std::fmt::Write;

use cdlsem_core::parser::load_model;
use cdlsem_core::Model;

pub const KERNEL: &str = include_str!("../../../fixtures/ecos_kernel.cdl");

/// A package of `n` options in components of eight. Options require their
/// predecessor or exclude it, every fifth one implements a shared interface,
/// and every seventh one is a data option with legal values.
pub fn synthetic_source(n: usize) -> String {
    let mut out = String::from("cdl_interface CYGINT_SYN_DRIVER {\n    requires { CYGINT_SYN_DRIVER <= 4 }\n}\n");
    out.push_str("cdl_package CYGPKG_SYN {\n");
    for block in 0..n.div_ceil(8) {
        let _ = writeln!(out, "    cdl_component CYGPKG_SYN_C{block} {{");
        for i in block * 8..((block + 1) * 8).min(n) {
            let _ = writeln!(out, "        cdl_option CYGOPT_SYN_{i} {{");
            if i % 7 == 3 {
                out.push_str("            flavor data\n            legal_values 0 to 16\n");
            }
            if i > 0 {
                let rel = if i % 3 == 0 { "!" } else { "" };
                let _ = writeln!(out, "            requires {rel}CYGOPT_SYN_{}", i - 1);
            }
            if i % 5 == 0 {
                out.push_str("            implements CYGINT_SYN_DRIVER\n");
            }
            if i % 11 == 10 {
                let _ = writeln!(out, "            active_if CYGOPT_SYN_{}", i / 2);
            }
            out.push_str("        }\n");
        }
        out.push_str("    }\n");
    }
    out.push_str("}\n");
    out
}

pub fn load(src: &str) -> Model {
    match load_model(src, "bench.cdl") {
        Ok((m, _)) => m,
        Err(e) => panic!("{e}"),
    }
}
