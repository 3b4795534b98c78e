#include "hubopt/lp_format.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace hubopt::milp {

namespace {

constexpr size_t kMaxLine = 255;

std::string number(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> unique_names(const std::vector<std::string>& raw, const char* fallback) {
    std::vector<std::string> out;
    out.reserve(raw.size());
    std::unordered_set<std::string> used;
    for (size_t i = 0; i < raw.size(); ++i) {
        std::string id = raw[i].empty() ? std::string(fallback) + std::to_string(i) : lp_identifier(raw[i]);
        if (!used.insert(id).second) {
            id += "_" + std::to_string(i);
            used.insert(id);
        }
        out.push_back(std::move(id));
    }
    return out;
}

void write_terms(std::ostream& out, std::string line, const std::vector<Term>& terms,
                 const std::vector<std::string>& names) {
    if (terms.empty()) line += " 0 " + names.front();
    for (const auto& t : terms) {
        std::string piece = (t.coef < 0 ? " - " : " + ") + number(std::abs(t.coef)) + " " +
                            names[static_cast<size_t>(t.var)];
        if (line.size() + piece.size() > kMaxLine) {
            out << line << '\n';
            line = "  ";
        }
        line += piece;
    }
    out << line;
}

}  // namespace

std::string lp_identifier(const std::string& name) {
    std::string s;
    s.reserve(name.size() + 2);
    for (char c : name) {
        if (c == '[') s += '(';
        else if (c == ']') s += ')';
        else if (c == ',') s += '.';
        else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
                 c == '(' || c == ')')
            s += c;
        else
            s += '_';
    }
    if (s.empty() || (s[0] >= '0' && s[0] <= '9') || s[0] == '.' || s[0] == 'e' || s[0] == 'E') s = "n_" + s;
    return s;
}

void write_lp(const MilpModel& model, std::ostream& out) {
    std::vector<std::string> raw_vars, raw_rows;
    for (const auto& v : model.variables()) raw_vars.push_back(v.name);
    for (const auto& c : model.constraints()) raw_rows.push_back(c.name);
    const auto vars = unique_names(raw_vars, "x");
    const auto rows = unique_names(raw_rows, "c");

    out << "\\ hubopt LP export\n";
    out << "\\ objective constant: " << number(model.objective().constant) << '\n';
    out << "Minimize\n";
    if (vars.empty()) {
        out << " obj:\n";
    } else {
        write_terms(out, " obj:", model.objective().terms, vars);
        out << '\n';
    }
    out << "Subject To\n";
    for (size_t i = 0; i < model.num_constraints(); ++i) {
        const auto& c = model.constraints()[i];
        write_terms(out, " " + rows[i] + ":", c.terms, vars);
        const char* op = c.sense == Sense::kLe ? " <= " : c.sense == Sense::kGe ? " >= " : " = ";
        out << op << number(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (size_t j = 0; j < model.num_variables(); ++j) {
        const auto& v = model.variables()[j];
        const bool binary = v.integrality == Integrality::kBinary;
        if (binary && v.lower == 0.0 && v.upper == 1.0) continue;
        if (!binary && v.lower == 0.0 && std::isinf(v.upper) && v.upper > 0) continue;
        if (std::isinf(v.lower) && v.lower < 0 && std::isinf(v.upper) && v.upper > 0) {
            out << ' ' << vars[j] << " free\n";
        } else if (v.lower == v.upper) {
            out << ' ' << vars[j] << " = " << number(v.lower) << '\n';
        } else {
            out << ' ' << number(v.lower) << " <= " << vars[j] << " <= " << number(v.upper) << '\n';
        }
    }
    bool any_binary = false;
    std::string line;
    for (size_t j = 0; j < model.num_variables(); ++j) {
        if (model.variables()[j].integrality != Integrality::kBinary) continue;
        if (!any_binary) out << "Binaries\n";
        any_binary = true;
        if (line.size() + vars[j].size() + 1 > kMaxLine) {
            out << line << '\n';
            line.clear();
        }
        line += ' ' + vars[j];
    }
    if (!line.empty()) out << line << '\n';
    out << "End\n";
}

std::string to_lp_string(const MilpModel& model) {
    std::ostringstream os;
    write_lp(model, os);
    return os.str();
}

}  // namespace hubopt::milp
