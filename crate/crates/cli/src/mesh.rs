//! CSV export of a family's grid.

use rayon::prelude::*;
use surflab::families::Family;
use surflab::immersion::generator_coefficients;
use surflab::Result;

/// Shortest representation that parses back to the same double.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Column names: `u, v`, the ambient coordinates `x0…`, `z`, then the generator fields.
pub fn header(base_dim: usize) -> String {
    let mut cols = vec!["u".to_string(), "v".to_string()];
    cols.extend((0..base_dim).map(|i| format!("x{i}")));
    cols.extend(["z", "e", "h1", "h2", "h3"].map(String::from));
    cols.join(",")
}

/// Metadata line, header and one row per grid point in v-major order.
pub fn mesh_csv(family: &Family) -> Result<String> {
    let chart = &family.chart;
    let grid = &family.grid;
    let rows = grid
        .points()
        .into_par_iter()
        .map(|(u, v)| {
            let p = chart.eval(u, v)?;
            let g = generator_coefficients(chart, u, v)?;
            let mut fields = vec![num(u), num(v)];
            fields.extend(p.as_slice().iter().map(|&x| num(x)));
            fields.extend([g.e, g.h1, g.h2, g.h3].map(num));
            Ok(fields.join(","))
        })
        .collect::<Result<Vec<String>>>()?;

    let mut out = format!(
        "# surflab mesh family={} c={} f={} grid={}x{}\n",
        family.id,
        chart.model().c_int(),
        chart.spacetime.warping.source(),
        grid.nu,
        grid.nv
    );
    out.push_str(&header(chart.spacetime.base_dim()));
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
