//! Plain-text table emission. Floats print through Rust's shortest
//! round-trip formatting, so identical inputs produce byte-identical files.

use crate::duality::{CurveSample, FinalStateResult};
use crate::models::EigenvalueRecord;
use crate::scalar::Scalar;

/// Curve CSV: `time,probe_label,re,im`, one row per (probe, time).
pub fn curve_to_csv<T: Scalar>(sample: &CurveSample<T>) -> String {
    let mut out = String::from("time,probe_label,re,im\n");
    for (label, series) in sample.probe_labels.iter().zip(&sample.pairings) {
        for (t, v) in sample.times.iter().zip(series) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.as_f64(),
                label,
                v.re.as_f64(),
                v.im.as_f64()
            ));
        }
    }
    out
}

/// Final-state CSV: `mode_index,re,im,result_index`.
pub fn final_state_to_csv<T: Scalar>(result: &FinalStateResult<T>) -> String {
    let mut out = String::from("mode_index,re,im,result_index\n");
    for (k, v) in result.state.iter() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k,
            v.re.as_f64(),
            v.im.as_f64(),
            result.result_index
        ));
    }
    out
}

/// Eigenvalue-table CSV:
/// `k,re_seed,im_seed,re_root,im_root,residual,control_trace_abs`.
pub fn eigenvalue_records_to_csv<T: Scalar>(records: &[EigenvalueRecord<T>]) -> String {
    let mut out = String::from("k,re_seed,im_seed,re_root,im_root,residual,control_trace_abs\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            r.seed.re.as_f64(),
            r.seed.im.as_f64(),
            r.root.re.as_f64(),
            r.root.im.as_f64(),
            r.residual.as_f64(),
            r.control_trace_abs.as_f64()
        ));
    }
    out
}
