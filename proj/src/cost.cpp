#include "cost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace opssc::cost {

void cost_params::validate() const {
    if (n_org < 1) throw std::invalid_argument("n_org must be >= 1");
    if (n_node < 1) throw std::invalid_argument("n_node must be >= 1");
    if (!(improvement_ratio > 0.0) || improvement_ratio > 1.0)
        throw std::invalid_argument("improvement ratio a must satisfy 0 < a <= 1");
    const double units[] = {c_plc_prop_unit, c_plc_appr_unit, c_ops_prop_unit, c_ops_appr_unit,
                            c_exec_unit,     c_trigger_unit,  c_dev_sc,        c_pair_unit};
    for (double u : units)
        if (u < 0.0 || !std::isfinite(u)) throw std::invalid_argument("unit costs must be >= 0");
}

double c_plc_adj(const cost_params& p, adjustment_model model) {
    p.validate();
    switch (model) {
    case adjustment_model::model2_proposer_approver:
        return p.c_plc_prop_unit + static_cast<double>(p.n_org - 1) * p.c_plc_appr_unit;
    case adjustment_model::model1_pairwise:
        return p.c_pair_unit * static_cast<double>(p.n_org) * static_cast<double>(p.n_org - 1) / 2.0;
    }
    throw std::invalid_argument("unknown adjustment model");
}

double c_ops_adj(const cost_params& p) {
    p.validate();
    return p.c_ops_prop_unit + static_cast<double>(p.n_org - 1) * p.c_ops_appr_unit;
}

double c_ops(const cost_params& p, cost_method method) {
    p.validate();
    switch (method) {
    case cost_method::conventional:
        return static_cast<double>(p.n_org) * static_cast<double>(p.n_node) * p.c_exec_unit;
    case cost_method::proposed:
        return p.c_trigger_unit;
    }
    throw std::invalid_argument("unknown cost method");
}

double total_cost(const cost_params& p, cost_method method, std::uint64_t n,
                  adjustment_model model) {
    p.validate();
    const double per_execution = (method == cost_method::conventional)
                                     ? c_ops_adj(p) + c_ops(p, cost_method::conventional)
                                     : c_ops(p, cost_method::proposed);
    double total = c_plc_adj(p, model);
    if (method == cost_method::proposed) total += p.c_dev_sc;
    double discount = 1.0; // a^(k-1), k starting at 1
    for (std::uint64_t k = 1; k <= n; ++k) {
        total += per_execution * discount;
        discount *= p.improvement_ratio;
    }
    return total;
}

double reduction_ratio(const cost_params& p, std::uint64_t n, adjustment_model model) {
    double conventional = total_cost(p, cost_method::conventional, n, model);
    double proposed = total_cost(p, cost_method::proposed, n, model);
    if (conventional == 0.0) return 0.0;
    return 1.0 - proposed / conventional;
}

std::vector<sweep_row> sweep(const cost_params& p, std::uint64_t n_from, std::uint64_t n_to,
                             adjustment_model model) {
    if (n_from > n_to) throw std::invalid_argument("empty n range");
    std::vector<sweep_row> rows;
    rows.reserve(n_to - n_from + 1);
    for (std::uint64_t n = n_from; n <= n_to; ++n) {
        sweep_row row;
        row.n = n;
        row.conventional_mm = total_cost(p, cost_method::conventional, n, model);
        row.proposed_mm = total_cost(p, cost_method::proposed, n, model);
        row.reduction = reduction_ratio(p, n, model);
        rows.push_back(row);
    }
    return rows;
}

static std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << v;
    return os.str();
}

std::string sweep_csv(const std::vector<sweep_row>& rows) {
    std::ostringstream os;
    os << "n,conventional_mm,proposed_mm,conventional_mh,proposed_mh,reduction\n";
    for (const auto& r : rows) {
        os << r.n << ',' << fmt(r.conventional_mm) << ',' << fmt(r.proposed_mm) << ','
           << fmt(r.conventional_mm / 60.0) << ',' << fmt(r.proposed_mm / 60.0) << ','
           << fmt(r.reduction) << '\n';
    }
    return os.str();
}

double round_man_hours(double mm) {
    double hours = mm / 60.0;
    return std::floor(hours * 10.0 + 0.5) / 10.0;
}

int round_percent(double ratio) {
    return static_cast<int>(std::floor(ratio * 100.0 + 0.5));
}

} // namespace opssc::cost
