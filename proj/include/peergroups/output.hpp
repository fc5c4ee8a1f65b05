#pragma once

// Result files. Every structured output carries schema_version.

#include <span>
#include <string>

#include "peergroups/backbone.hpp"
#include "peergroups/experiments.hpp"
#include "peergroups/network.hpp"
#include "peergroups/recall.hpp"
#include "peergroups/regression.hpp"

namespace peergroups::output {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string network_csv(const PeerNetwork& n, std::span<const ChildId> children);
std::string pvalues_csv(const backbone::BackboneResult& b, std::span<const ChildId> children);
std::string groups_json(const GroupAssignment& g, std::span<const ChildId> children, double p);

std::string records_csv(std::span<const experiments::RunRecord> records);
std::string summary_json(const experiments::AuditSummary& s);
std::string histogram_csv(std::span<const experiments::RunRecord> records);
std::string regression_json(const regression::RegressionResult& r);

}  // namespace peergroups::output
