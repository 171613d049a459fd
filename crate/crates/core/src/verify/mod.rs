//! Normal-form checks over emitted schemas.

mod bcnf;
mod fourth;
mod improved;
mod report;
mod xml;

pub use bcnf::{check_bcnf, BCNF_LIMIT};
pub use fourth::{check_4nf, check_4nf_with, FOURTH_NF_LIMIT};
pub use improved::check_improved_bcnf;
pub use report::{NfReport, Verdict, Witness};
pub use xml::{check_xml_nf, derive_xml_fds, PathFd};

use crate::schema::NameSet;

/// Nonempty subsets of `items`, by size and then by position.
pub(crate) fn subsets_by_size(items: &[String]) -> Vec<NameSet> {
    let n = items.len();
    let mut masks: Vec<u32> = (1u32..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    masks
        .into_iter()
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| items[i].clone()).collect())
        .collect()
}
