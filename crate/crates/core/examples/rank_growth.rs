//! Growth of the visible rank of Y/I_n Y.

use iwasawa::towers::{rank_growth, LambdaPresentation};
use iwasawa::{Expr, GammaVector};

fn main() -> iwasawa::Result<()> {
    for (name, pres) in [
        ("free rank 2", LambdaPresentation::free(2)),
        ("(omega(s1,0))", LambdaPresentation::cyclic(vec![Expr::omega(GammaVector::basis(2, 0), 0)])),
    ] {
        let g = rank_growth(&pres, 2, 2, 2, 3)?;
        println!("{name}:");
        for e in &g.entries {
            println!("  n={} r_n={} r_n/p^(dn)={:.4}", e.n, e.visible_rank, e.ratio);
        }
    }
    Ok(())
}
