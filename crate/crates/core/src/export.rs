//! CSV exports of feature tables and fitted densities.

use std::fmt::Write as _;

use crate::cir::Label;
use crate::classify::FittedModel;
use crate::density::HistogramPdf;
use crate::error::Result;
use crate::features::{Feature, FeatureVector};
use crate::scalar::Scalar;

pub const FEATURE_TABLE_HEADER: &str =
    "label,skewness,kurtosis,med,rds,energy,energy_ratio,amp_mean";
pub const PDF_CURVE_HEADER: &str = "feature,class,bin_lo,bin_hi,density";
pub const JOINT_GRID_HEADER: &str = "feature_a,feature_b,value_a,value_b,density";

pub fn feature_row<T: Scalar>(label: Label, fv: &FeatureVector<T>) -> String {
    let mut row = label.as_str().to_string();
    for f in Feature::ALL {
        row.push(',');
        row.push_str(&fv.get(f).to_full_precision());
    }
    row
}

pub fn feature_table<'a, T: Scalar>(
    rows: impl IntoIterator<Item = (Label, &'a FeatureVector<T>)>,
) -> String {
    let mut out = format!("{FEATURE_TABLE_HEADER}\n");
    for (label, fv) in rows {
        out.push_str(&feature_row(label, fv));
        out.push('\n');
    }
    out
}

pub fn pdf_curve<T: Scalar>(feature: Feature, label: Label, pdf: &HistogramPdf<T>) -> String {
    let mut out = format!("{PDF_CURVE_HEADER}\n");
    for (w, d) in pdf.edges().windows(2).zip(pdf.densities()) {
        let _ = writeln!(
            out,
            "{feature},{label},{},{},{}",
            w[0].to_full_precision(),
            w[1].to_full_precision(),
            d.to_full_precision()
        );
    }
    out
}

/// Product-form joint density of one class on the bin-center grid.
pub fn joint_grid<T: Scalar>(
    model: &FittedModel<T>,
    a: Feature,
    b: Feature,
    label: Label,
) -> Result<String> {
    let pick = |f: Feature| -> Result<&HistogramPdf<T>> {
        let cd = &model.feature(f)?.densities;
        Ok(match label {
            Label::Los => &cd.los,
            Label::Nlos => &cd.nlos,
        })
    };
    let (pa, pb) = (pick(a)?, pick(b)?);
    let mut out = format!("{JOINT_GRID_HEADER}\n");
    for (xa, da) in pa.bin_centers().zip(pa.densities()) {
        for (xb, db) in pb.bin_centers().zip(pb.densities()) {
            let _ = writeln!(
                out,
                "{a},{b},{},{},{}",
                xa.to_full_precision(),
                xb.to_full_precision(),
                (*da * *db).to_full_precision()
            );
        }
    }
    Ok(out)
}
