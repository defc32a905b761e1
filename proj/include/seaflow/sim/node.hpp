#pragma once

#include <map>

#include "seaflow/sim/model.hpp"

namespace seaflow::sim {

enum class EnergyKind { Sample, Cpu, Tx, Rx };

/**
 * NodeRuntime - battery, aggregation and buffer state of one node.
 *
 * All debits go through debit(), which never lets the battery go negative
 * and records every nanojoule in the ledger, so conservation is exact by
 * construction.
 */
class NodeRuntime {
public:
    NodeRuntime(std::string node_id, NodeRole role, double battery_j,
                EnergyCosts costs, AggregationPolicy policy,
                std::size_t buffer_capacity = 4096);

    /// Takes up to nj from the battery; returns what was actually taken.
    std::int64_t debit(std::int64_t nj, EnergyKind kind);

    bool battery_dead() const { return battery_nj_ == 0; }
    bool alive_at(TimestampMs t) const;

    /// Folds one reading through the aggregation policy. Debits cpu per
    /// input reading; a node that dies mid-processing emits nothing.
    std::vector<OutRecord> process(const RawReading& r,
                                   std::int64_t sampling_interval_s);

    const std::string& node_id() const { return node_id_; }
    NodeRole role() const { return role_; }
    std::int64_t battery_nj() const { return battery_nj_; }
    std::int64_t initial_battery_nj() const { return initial_battery_nj_; }
    const EnergyCosts& costs() const { return costs_; }
    const EnergyLedger& ledger() const { return ledger_; }
    const AggregationPolicy& policy() const { return policy_; }

    std::deque<OutRecord> buffer;  // gateway-side FIFO
    std::size_t buffer_capacity() const { return buffer_capacity_; }
    std::vector<FaultEvent> fault_plan;  // NodeDead windows

    std::uint64_t tx_bytes = 0;
    std::uint64_t rx_bytes = 0;

private:
    struct WindowAcc {
        double sum = 0, min = 0, max = 0;
        std::uint32_t count = 0;
        std::optional<FaultKind> fault;
    };

    std::string node_id_;
    NodeRole role_;
    std::int64_t battery_nj_;
    std::int64_t initial_battery_nj_;
    EnergyCosts costs_;
    EnergyLedger ledger_;
    AggregationPolicy policy_;
    std::size_t buffer_capacity_;
    std::map<std::string, WindowAcc> windows_;          // MeanOverWindow
    std::map<std::string, double> last_emitted_;        // EventOnly
};

}  // namespace seaflow::sim
