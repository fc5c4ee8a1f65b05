#pragma once

#include <string_view>

namespace peergroups::fixtures {

/// Report-list text of the planted-structure surrogate classroom
/// (26 children, 61 reports, 5 planted groups). Generated by
/// tools/make_surrogate.py and committed under data/.
std::string_view surrogate_classroom_text();

}  // namespace peergroups::fixtures
