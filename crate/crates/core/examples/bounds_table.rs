//! Every closed-form bound at the default rates, as a text table.

use asuman::bounds::{all_reports, render_text, BoundParams};

fn main() -> asuman::Result<()> {
    let params = BoundParams {
        lambda_e: Some(1.0),
        lambda: Some(1.0),
        n: Some(100),
        q: Some(0.5),
        c: Some(10),
        m: Some(10),
        p: Some(0.5),
        nu: Some(0.75),
        i: Some(1),
        k: Some(10),
        lambda_i: Some(0.5),
        ..Default::default()
    };
    print!("{}", render_text(&all_reports(&params)?));
    Ok(())
}
