//! Exact and quadrature-built profiles.

pub mod gardner;
pub mod ground_state;
pub mod kink;
pub mod multikink;
pub mod tabulated;

use std::io::Write;

use crate::error::Result;

pub use gardner::{
    eval_even_two_kink, eval_gardner_soliton, gardner_identities_report, weinstein_check, EvenTwoKink,
    GardnerSoliton, IdentityReport,
};
pub use ground_state::{solve_ground_state, GroundState};
pub use kink::{eval_kink, solve_generalized_kink, KinkProfile};
pub use multikink::{build_multikink_profile, MultiKinkConfig, Parity};

/// Writes `x,value,derivative` rows for each abscissa.
pub fn write_profile_csv<W: Write>(
    writer: W,
    xs: &[f64],
    profile: impl Fn(f64) -> (f64, f64),
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "value", "derivative"])?;
    for &x in xs {
        let (v, d) = profile(x);
        w.write_record([x.to_string(), v.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_export_has_header_and_rows() {
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &[0.0, 1.0], |x| (kink::value(1.0, x), kink::derivative(1.0, x, 1))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,value,derivative");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,0,"));
    }
}
