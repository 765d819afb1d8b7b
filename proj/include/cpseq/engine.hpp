#pragma once
// Scenario engine: drives the full pipeline over simulated ticks. Scans
// classify and fingerprint assets, identities get minted on the ledger,
// proxies track drifting true state, triggers and custody changes land
// in provenance, scripted manager actions exercise the permission layer,
// and an optional adversary sweep stresses confirmation stability.

#include "cpseq/scenario.hpp"

#include <string>

namespace cpseq::sim {

struct RunReport {
    std::string log;           // line-oriented audit log, one event per line
    std::string summary_json;  // deterministic machine-readable summary
};

// Runs the scenario to completion. Deterministic: the same scenario and
// seed produce byte-identical reports.
RunReport run_scenario(const Scenario& scenario);

}  // namespace cpseq::sim
