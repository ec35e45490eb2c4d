#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace opssc::cost {

// Every unit is man-minutes (MM); reports convert to man-hours at /60.
struct cost_params {
    std::uint64_t n_org = 7;
    std::uint64_t n_node = 2;
    double c_plc_prop_unit = 79.0; // proposer defines and proposes the policy
    double c_plc_appr_unit = 5.6;  // each approver org approves the policy
    double c_ops_prop_unit = 13.0; // proposer requests one execution
    double c_ops_appr_unit = 2.4;  // each approver approves one execution
    double c_exec_unit = 6.7;      // manual execution, per node per execution
    double c_trigger_unit = 0.8;   // triggering tx, per execution
    double c_dev_sc = 32.9;        // one-time contract development and deployment
    double improvement_ratio = 1.0; // a: per-execution learning effect, 0 < a <= 1

    // Pairwise adjustment unit for model 1 (quadratic in orgs). Not a
    // measured value; must be supplied when model 1 is selected.
    double c_pair_unit = 0.0;

    void validate() const; // throws std::invalid_argument on violation
};

enum class adjustment_model {
    model1_pairwise,          // every org pair adjusts: C_pair * N*(N-1)/2
    model2_proposer_approver, // one proposer, N-1 approvers (the default)
};

enum class cost_method { conventional, proposed };

// Policy-definition adjustment cost, shared by both methods.
double c_plc_adj(const cost_params& p, adjustment_model model);

// Per-execution timing/parameter adjustment; conventional method only.
double c_ops_adj(const cost_params& p);

// Per-execution operation cost: every node by hand, or one trigger tx.
double c_ops(const cost_params& p, cost_method method);

// Accumulated total over executions k = 1..n, each discounted by a^(k-1).
double total_cost(const cost_params& p, cost_method method, std::uint64_t n,
                  adjustment_model model);

// 1 - proposed/conventional at the same n.
double reduction_ratio(const cost_params& p, std::uint64_t n, adjustment_model model);

struct sweep_row {
    std::uint64_t n = 0;
    double conventional_mm = 0.0;
    double proposed_mm = 0.0;
    double reduction = 0.0;
};

std::vector<sweep_row> sweep(const cost_params& p, std::uint64_t n_from, std::uint64_t n_to,
                             adjustment_model model);

// CSV for plotting: n,conventional_mm,proposed_mm,conventional_mh,proposed_mh,reduction
std::string sweep_csv(const std::vector<sweep_row>& rows);

// Reporting helpers: man-hours rounded half-up to one decimal, reduction as
// a whole percent (9.37 h -> 9.4, 0.7359 -> 74).
double round_man_hours(double mm);
int round_percent(double ratio);

} // namespace opssc::cost
