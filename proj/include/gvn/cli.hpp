#pragma once

// Command surface shared by the gvn binary and the tests: analyze, check,
// eliminate and dump-cfg over a flow-graph file, with text or JSON output.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gvn/analysis.hpp"
#include "gvn/errors.hpp"
#include "gvn/ir.hpp"
#include "gvn/oracle.hpp"
#include "gvn/pool.hpp"
#include "gvn/redundancy.hpp"

namespace gvn::cli {

struct RunConfig {
    enum class Command { Analyze, Check, Eliminate, DumpCfg };
    enum class Format { Text, Json };

    std::string input_path;
    Command command = Command::Analyze;
    Format format = Format::Text;
    bool trace = false;
    std::optional<int> max_sweeps;
    int unroll = 3;
    bool ascii = false;
    bool fail_on_redundant = false;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int findings = 1;         // redundancies under --fail-on-redundant, oracle findings
inline constexpr int input_error = 2;      // parse or validation failure
inline constexpr int budget = 3;           // oracle budget exceeded
inline constexpr int non_convergence = 4;  // sweep cap hit
}  // namespace exit_code

namespace detail {

inline nlohmann::json pool_to_json(const ExpressionPool& pool) {
    if (pool.is_top()) return "TOP";
    nlohmann::json classes = nlohmann::json::array();
    auto ordering = gvn::detail::canonical_ordering(pool);
    for (std::size_t pos : ordering.positions) {
        const EqClass& c = pool.classes()[pos];
        nlohmann::json members = nlohmann::json::array();
        members.push_back(render(c.vn));  // value number first, display convention
        for (const auto& m : c.members)
            if (std::holds_alternative<ValueExpression>(m)) members.push_back(render(m));
        for (const auto& m : c.members)
            if (std::holds_alternative<Constant>(m)) members.push_back(render(m));
        for (const auto& m : c.members)
            if (std::holds_alternative<Variable>(m)) members.push_back(render(m));
        classes.push_back(std::move(members));
    }
    return classes;
}

inline nlohmann::json verdict_to_json(const RedundancyVerdict& v, const FlowGraph& g) {
    nlohmann::json j;
    j["node"] = v.node;
    j["stmt"] = render_statement(v.stmt);
    j["kind"] = std::string(to_string(v.kind));
    j["redundant"] = v.redundant;
    j["vn"] = v.vn ? nlohmann::json(render(*v.vn)) : nlohmann::json(nullptr);
    j["witnesses"] = v.witnesses;
    if (v.stmt.line > 0) j["line"] = v.stmt.line;
    if (const Node* n = g.find_node(v.node); n && n->origin)
        j["origin"] = {{"node", n->origin->node_id}, {"stmt", n->origin->stmt_index}};
    return j;
}

inline std::string describe_node(const FlowGraph& g, const Node& n) {
    std::string out = n.id;
    if (n.id == g.entry) out += " (entry)";
    if (n.id == g.exit) out += " (exit)";
    if (const Statement* st = n.single_statement()) out += ": " + render_statement(*st);
    return out;
}

inline void write_text_report(std::ostream& os, const FlowGraph& g, const AnalysisResult& r,
                              const RedundancyReport& rep, const RenderOptions& opts) {
    os << "graph " << g.name << "\n";
    os << "sweeps: " << r.sweeps << "\n\n";
    for (const auto& n : g.nodes) {
        os << "node " << describe_node(g, n) << "\n";
        os << "  EIN : " << render(r.ein.at(n.id), opts) << "\n";
        os << "  EOUT: " << render(r.eout.at(n.id), opts) << "\n";
    }
    os << "\nredundancy report:\n";
    for (const auto& v : rep.verdicts) {
        os << "  node " << v.node << ": " << render_statement(v.stmt) << " -> "
           << to_string(v.kind);
        if (v.vn) {
            os << " (class " << render(*v.vn);
            if (!v.witnesses.empty()) {
                os << ", witnesses:";
                for (const auto& w : v.witnesses) os << " " << w;
            }
            os << ")";
        }
        os << "\n";
    }
    os << "counts: " << rep.counts.redundant << " redundant, " << rep.counts.novel << " novel, "
       << rep.counts.copies << " copies";
    if (rep.counts.unreachable) os << ", " << rep.counts.unreachable << " unreachable";
    os << "\n";
}

inline nlohmann::json analysis_to_json(const FlowGraph& g, const AnalysisResult& r,
                                       const RedundancyReport& rep) {
    nlohmann::json j;
    j["graph"] = g.name;
    j["sweeps"] = r.sweeps;
    j["pools"] = nlohmann::json::array();
    for (const auto& n : g.nodes)
        j["pools"].push_back({{"node", n.id},
                              {"ein", pool_to_json(r.ein.at(n.id))},
                              {"eout", pool_to_json(r.eout.at(n.id))}});
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : rep.verdicts) j["verdicts"].push_back(verdict_to_json(v, g));
    j["counts"] = {{"redundant", rep.counts.redundant},
                   {"novel", rep.counts.novel},
                   {"copies", rep.counts.copies},
                   {"unreachable", rep.counts.unreachable}};
    return j;
}

inline void write_findings_text(std::ostream& os, const std::string& label,
                                const std::vector<OracleFinding>& findings) {
    for (const auto& f : findings) {
        os << label << " at " << f.point.label() << ": " << f.left << " ~ " << f.right << "\n";
        for (const auto& d : f.detail) os << "  " << d << "\n";
    }
}

inline nlohmann::json findings_to_json(const std::vector<OracleFinding>& findings) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : findings)
        arr.push_back(
            {{"point", f.point.label()}, {"left", f.left}, {"right", f.right}, {"paths", f.detail}});
    return arr;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline void write_dot(std::ostream& os, const FlowGraph& g, const AnalysisResult& r,
                      const RenderOptions& opts) {
    os << "digraph " << (g.name.empty() ? "g" : g.name) << " {\n";
    os << "  node [shape=box, fontname=\"monospace\"];\n";
    for (const auto& n : g.nodes) {
        std::string label = n.id;
        if (n.id == g.entry) label += " (entry)";
        if (n.id == g.exit) label += " (exit)";
        for (const auto& st : n.stmts) label += "\\l" + dot_escape(render_statement(st));
        label += "\\lEIN: " + dot_escape(render(r.ein.at(n.id), opts)) + "\\l";
        os << "  \"" << dot_escape(n.id) << "\" [label=\"" << label << "\"];\n";
    }
    for (const auto& e : g.edges)
        os << "  \"" << dot_escape(e.from) << "\" -> \"" << dot_escape(e.to) << "\";\n";
    os << "}\n";
}

}  // namespace detail

/// Runs one command over in-memory source. Returns the process exit code.
inline int run_on_source(const RunConfig& cfg, std::string_view source, std::ostream& out,
                         std::ostream& err) {
    RenderOptions render_opts{cfg.ascii};

    FlowGraph parsed;
    try {
        parsed = parse_program(source);
    } catch (const ParseError& e) {
        err << (cfg.input_path.empty() ? "<input>" : cfg.input_path) << ":" << e.what() << "\n";
        return exit_code::input_error;
    }

    FlowGraph g = normalize(parsed);
    bool entry_broken = false;
    for (const auto& d : validate(g)) {
        bool hard = d.code == Diagnostic::Code::EntryHasIncomingEdges;
        entry_broken = entry_broken || hard;
        err << (hard ? "error: " : "warning: ") << d.message << "\n";
    }
    if (entry_broken) return exit_code::input_error;

    AnalysisOptions opts;
    opts.max_sweeps = cfg.max_sweeps;
    if (cfg.trace)
        opts.trace = [&](int sweep, const std::string& node, const ExpressionPool& ein,
                         const ExpressionPool& eout) {
            out << "trace: sweep " << sweep << " node " << node << ": EIN="
                << render(ein, render_opts) << " EOUT=" << render(eout, render_opts) << "\n";
        };

    AnalysisResult result;
    try {
        result = run_gvn(g, opts);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& [node, pool] : e.last_eout())
            err << "  " << node << ": " << render(pool, render_opts) << "\n";
        return exit_code::non_convergence;
    }

    switch (cfg.command) {
        case RunConfig::Command::Analyze: {
            RedundancyReport rep = detect(g, result);
            if (cfg.format == RunConfig::Format::Json)
                out << detail::analysis_to_json(g, result, rep).dump(2) << "\n";
            else
                detail::write_text_report(out, g, result, rep, render_opts);
            return (cfg.fail_on_redundant && rep.counts.redundant > 0) ? exit_code::findings
                                                                       : exit_code::ok;
        }
        case RunConfig::Command::Check: {
            bool acyclic = !has_back_edge(g);
            std::vector<OracleFinding> violations, misses;
            try {
                violations = check_soundness(g, result, cfg.unroll);
                if (acyclic) misses = check_completeness_acyclic(g, result);
            } catch (const BudgetError& e) {
                err << "error: " << e.what() << "\n";
                return exit_code::budget;
            }
            if (cfg.format == RunConfig::Format::Json) {
                nlohmann::json j;
                j["graph"] = g.name;
                j["soundness"] = {{"violations", detail::findings_to_json(violations)}};
                j["completeness"] = {{"checked", acyclic},
                                     {"misses", detail::findings_to_json(misses)}};
                out << j.dump(2) << "\n";
            } else {
                out << "graph " << g.name << "\n";
                if (violations.empty())
                    out << "soundness: ok\n";
                else
                    detail::write_findings_text(out, "soundness violation", violations);
                if (!acyclic)
                    out << "completeness: skipped (graph has cycles, soundness only)\n";
                else if (misses.empty())
                    out << "completeness: ok\n";
                else
                    detail::write_findings_text(out, "completeness miss", misses);
            }
            return (violations.empty() && misses.empty()) ? exit_code::ok : exit_code::findings;
        }
        case RunConfig::Command::Eliminate: {
            RedundancyReport rep = detect(g, result);
            FlowGraph rewritten = eliminate(g, rep, result);
            out << render_program(rewritten);
            detail::write_text_report(err, g, result, rep, render_opts);
            return (cfg.fail_on_redundant && rep.counts.redundant > 0) ? exit_code::findings
                                                                       : exit_code::ok;
        }
        case RunConfig::Command::DumpCfg: {
            detail::write_dot(out, g, result, render_opts);
            return exit_code::ok;
        }
    }
    return exit_code::input_error;
}

/// Reads the configured input file and runs the command.
inline int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ifstream in(cfg.input_path);
    if (!in) {
        err << "error: cannot open '" << cfg.input_path << "'\n";
        return exit_code::input_error;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return run_on_source(cfg, buffer.str(), out, err);
}

}  // namespace gvn::cli
