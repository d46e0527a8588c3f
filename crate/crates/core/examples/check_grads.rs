//! Central-difference audit of every loss gradient.

use bilinear_ac::sac::gradcheck::{check_all, GRADCHECK_TOLERANCE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ok = true;
    for (variant, c) in check_all(0)? {
        println!("{variant:<18} {:<8} {:<15} {:.2e}", c.loss, c.group, c.max_rel_error);
        ok &= c.passed();
    }
    println!("{} (tolerance {GRADCHECK_TOLERANCE:.0e})", if ok { "all gradients match" } else { "MISMATCH" });
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
