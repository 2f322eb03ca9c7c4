// Command-line front end for the workflow toolkit.
//
//   flowkit validate <model>
//   flowkit compile --model F [--dump-paths]
//   flowkit run --model F [--inputs F] [--signals F] [--max-ticks N] [--trace OUT]
//   flowkit oracle run   (same flags as run)
//   flowkit oracle fuzz [--seeds N] [--size S]
//   flowkit measure --model F (--trace F | --runs DIR) [--format table|csv|json-lines]
//   flowkit transform --model F --out F [--trace F]
//   flowkit trace-check --model F --bpmn F --trace F
//
// Machine output goes to files or standard output; diagnostics go to the
// error stream. Outputs carry no timestamps or absolute paths, so identical
// invocations produce byte-identical files.
//
// Exit codes: 0 ok, 1 usage, 2 deadlock, 3 run failure, 4 tick budget
// exhausted, 5 validation (or parse) errors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "flowkit/compile.hpp"
#include "flowkit/generator.hpp"
#include "flowkit/measures.hpp"
#include "flowkit/model_io.hpp"
#include "flowkit/oracle.hpp"
#include "flowkit/runtime.hpp"
#include "flowkit/trace.hpp"
#include "flowkit/transform.hpp"
#include "flowkit/validate.hpp"

namespace {

using namespace flowkit;

constexpr int kOk = 0, kUsage = 1, kDeadlock = 2, kRunFailure = 3, kBudget = 4, kInvalid = 5;

struct ExitWith {
    int code;
};

int status_code(const std::string& s) {
    if (s == "completed") return kOk;
    if (s == "deadlocked") return kDeadlock;
    if (s == "budget") return kBudget;
    return kRunFailure;
}

void require_file(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) {
        std::cerr << "no such file: " << path << "\n";
        throw ExitWith{kUsage};
    }
}

ProcessModel load_validated(const std::string& path) {
    require_file(path);
    ProcessModel m = load_model(path);
    ValidationReport r = validate(m);
    for (const Finding& f : r.findings) std::cerr << to_text(f) << "\n";
    if (r.has_errors()) throw ExitWith{kInvalid};
    return m;
}

json parse_json_file(const std::string& path) {
    require_file(path);
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path, e.what());
    }
}

RunSpec build_spec(const ProcessModel& m, const std::string& inputsPath,
                   const std::string& signalsPath, int64_t maxTicks) {
    RunSpec spec;
    spec.maxTicks = maxTicks;
    if (inputsPath.empty()) {
        for (const Activity* a : main_activities(m)) spec.instances.push_back({a->id, {}});
    } else {
        json j = parse_json_file(inputsPath);
        if (!j.is_object() || !j.contains("instances") || !j["instances"].is_array())
            throw ParseError(inputsPath, "expected an object with an 'instances' array");
        for (const json& inst : j["instances"]) {
            RunSpec::Seed seed;
            if (!inst.contains("activity") || !inst["activity"].is_string())
                throw ParseError(inputsPath, "each instance needs an 'activity'");
            seed.activity = inst["activity"].get<std::string>();
            if (inst.contains("bindings"))
                for (auto it = inst["bindings"].begin(); it != inst["bindings"].end(); ++it)
                    seed.bindings[it.key()] = detail::value_from_json(it.value(), inputsPath);
            spec.instances.push_back(std::move(seed));
        }
    }
    if (!signalsPath.empty()) {
        json j = parse_json_file(signalsPath);
        if (!j.is_object() || !j.contains("signals") || !j["signals"].is_array())
            throw ParseError(signalsPath, "expected an object with a 'signals' array");
        for (const json& s : j["signals"]) {
            RunSpec::External ext;
            if (!s.contains("tick") || !s.contains("signal") || !s.contains("to"))
                throw ParseError(signalsPath, "each signal row needs 'tick', 'signal' and 'to'");
            ext.tick = s["tick"].get<int64_t>();
            ext.signal = s["signal"].get<std::string>();
            ext.toActivity = s["to"].get<std::string>();
            if (s.contains("payload"))
                ext.payload = detail::value_from_json(s["payload"], signalsPath);
            spec.externals.push_back(std::move(ext));
        }
    }
    return spec;
}

int cmd_validate(const std::string& path) {
    require_file(path);
    ProcessModel m = load_model(path);
    ValidationReport r = validate(m);
    size_t errors = 0, warnings = 0;
    for (const Finding& f : r.findings) {
        std::cout << to_text(f) << "\n";
        (f.severity == Finding::Severity::Error ? errors : warnings)++;
    }
    std::cout << errors << " error(s), " << warnings << " warning(s)\n";
    return errors ? kInvalid : kOk;
}

int cmd_compile(const std::string& path, bool dump) {
    ProcessModel m = load_validated(path);
    CompiledModel cm = compile(m);
    for (const std::string& w : cm.warnings) std::cerr << w << "\n";
    if (dump) {
        std::cout << dump_paths(cm);
    } else {
        size_t paths = 0;
        for (const auto& [id, ca] : cm.activities) paths += ca.paths.size();
        std::cout << "compiled " << cm.activities.size() << " activities, " << paths
                  << " paths\n";
    }
    return kOk;
}

int cmd_run(bool oracleMode, const std::string& modelPath, const std::string& inputsPath,
            const std::string& signalsPath, int64_t maxTicks, const std::string& tracePath) {
    ProcessModel m = load_validated(modelPath);
    RunSpec spec = build_spec(m, inputsPath, signalsPath, maxTicks);
    RunOutcome out;
    if (oracleMode) {
        out = run_oracle(m, spec);
    } else {
        CompiledModel cm = compile(m);
        out = run_process(cm, spec);
    }
    std::string text = to_text(out.log);
    if (tracePath.empty())
        std::cout << text;
    else
        write_text_file(tracePath, text);
    for (const std::string& d : out.diagnostics) std::cerr << d << "\n";
    std::cerr << out.status << " at tick " << out.finalClock << "\n";
    return status_code(out.status);
}

int cmd_fuzz(int64_t seeds, int rewrites) {
    int64_t passed = 0;
    for (int64_t seed = 1; seed <= seeds; ++seed) {
        std::string verdict = "ok";
        ProcessModel m = generate_model(static_cast<uint64_t>(seed), rewrites);
        ValidationReport r = validate(m);
        if (r.has_errors()) {
            verdict = "generated model fails validation";
        } else {
            RunSpec spec;
            for (const Activity* a : main_activities(m)) spec.instances.push_back({a->id, {}});
            CompiledModel cm = compile(m);
            RunOutcome vm = run_process(cm, spec);
            RunOutcome orc = run_oracle(m, spec);
            if (vm.status != orc.status)
                verdict = "status " + vm.status + " vs " + orc.status;
            else {
                std::string diff = diff_projections(project_action_events(vm.log),
                                                    project_action_events(orc.log));
                if (!diff.empty()) verdict = diff;
            }
        }
        if (verdict == "ok") ++passed;
        std::cout << "seed " << seed << "  " << verdict << "\n";
    }
    std::cout << passed << "/" << seeds << " equivalent\n";
    return passed == seeds ? kOk : kRunFailure;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

int cmd_measure(const std::string& modelPath, const std::string& tracePath,
                const std::string& runsDir, const std::string& format) {
    ProcessModel m = load_validated(modelPath);
    std::vector<std::pair<std::string, EventLog>> runs;
    if (!tracePath.empty()) {
        require_file(tracePath);
        runs.emplace_back("run", parse_log(read_text_file(tracePath)));
    }
    if (!runsDir.empty()) {
        if (!std::filesystem::is_directory(runsDir)) {
            std::cerr << "no such directory: " << runsDir << "\n";
            return kUsage;
        }
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(runsDir))
            if (entry.is_regular_file() && entry.path().extension() == ".log")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            runs.emplace_back(f.stem().string(), parse_log(read_text_file(f.string())));
    }
    if (runs.empty()) {
        std::cerr << "measure needs --trace FILE or --runs DIR\n";
        return kUsage;
    }

    std::vector<measures::MeasureRow> rows = measures::evaluate_measures(m, runs);
    auto value_text = [](const measures::MeasureRow& r) {
        return r.value ? to_text(*r.value) : std::string("-");
    };
    if (format == "csv") {
        std::cout << "element,measure,scope,value,unit,error\n";
        for (const auto& r : rows)
            std::cout << csv_field(r.element) << ',' << csv_field(r.measure) << ','
                      << csv_field(r.scope) << ',' << value_text(r) << ',' << csv_field(r.unit)
                      << ',' << csv_field(r.error) << "\n";
    } else if (format == "json-lines") {
        for (const auto& r : rows) {
            json j;
            j["element"] = r.element;
            j["measure"] = r.measure;
            j["scope"] = r.scope;
            if (r.value) j["value"] = to_text(*r.value);
            j["unit"] = r.unit;
            if (!r.error.empty()) j["error"] = r.error;
            std::cout << j.dump() << "\n";
        }
    } else {
        std::vector<std::vector<std::string>> table{{"element", "measure", "scope", "value", "unit"}};
        for (const auto& r : rows) {
            std::vector<std::string> row{r.element, r.measure, r.scope, value_text(r), r.unit};
            if (!r.error.empty()) row.push_back("! " + r.error);
            table.push_back(std::move(row));
        }
        std::vector<size_t> width(5, 0);
        for (const auto& row : table)
            for (size_t i = 0; i < 5 && i < row.size(); ++i)
                width[i] = std::max(width[i], row[i].size());
        for (const auto& row : table) {
            std::string line;
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) line += "  ";
                line += row[i];
                if (i < 4 && i + 1 < row.size()) line.append(width[i] - row[i].size(), ' ');
            }
            std::cout << line << "\n";
        }
    }
    return kOk;
}

int cmd_transform(const std::string& modelPath, const std::string& outPath,
                  const std::string& tracePath) {
    ProcessModel m = load_validated(modelPath);
    bpmn::TransformResult res = bpmn::transform(m);
    write_text_file(outPath, bpmn::serialize_bpmn(res.model));
    if (!tracePath.empty()) write_text_file(tracePath, to_text(res.trace));
    return kOk;
}

int cmd_trace_check(const std::string& modelPath, const std::string& bpmnPath,
                    const std::string& tracePath) {
    ProcessModel m = load_validated(modelPath);
    require_file(bpmnPath);
    require_file(tracePath);
    bpmn::BpmnModel b = bpmn::parse_bpmn(read_text_file(bpmnPath));
    bpmn::TraceMap t = bpmn::parse_trace(read_text_file(tracePath));
    ValidationReport tot = bpmn::check_trace_totality(m, b, t);
    for (const Finding& f : tot.findings) std::cout << to_text(f) << "\n";
    bpmn::SkeletonVerdict v = bpmn::structural_skeleton_equivalence(m, b, t);
    if (v.ok)
        std::cout << "skeleton equivalence holds\n";
    else
        std::cout << "skeleton mismatch: " << v.witness << "\n";
    std::cout << tot.findings.size() << " trace finding(s)\n";
    return (tot.findings.empty() && v.ok) ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workflow process toolkit"};
    app.require_subcommand(1);

    std::string modelPath, inputsPath, signalsPath, tracePath, outPath, bpmnPath, runsDir;
    std::string format = "table";
    int64_t maxTicks = 100000, seeds = 100;
    int size = 6;
    bool dumpPaths = false;

    CLI::App* validateCmd = app.add_subcommand("validate", "check a model document");
    validateCmd->add_option("model", modelPath, "model document")->required();

    CLI::App* compileCmd = app.add_subcommand("compile", "compile stable-place paths");
    compileCmd->add_option("--model", modelPath, "model document")->required();
    compileCmd->add_flag("--dump-paths", dumpPaths, "print one line per compiled path");

    auto add_run_flags = [&](CLI::App* c) {
        c->add_option("--model", modelPath, "model document")->required();
        c->add_option("--inputs", inputsPath, "instance/bindings file (JSON)");
        c->add_option("--signals", signalsPath, "external signal schedule (JSON)");
        c->add_option("--max-ticks", maxTicks, "tick budget");
        c->add_option("--trace", tracePath, "write the event log here instead of stdout");
    };
    CLI::App* runCmd = app.add_subcommand("run", "execute on the token virtual machine");
    add_run_flags(runCmd);

    CLI::App* oracleCmd = app.add_subcommand("oracle", "reference interpreter");
    oracleCmd->require_subcommand(1);
    CLI::App* oracleRunCmd = oracleCmd->add_subcommand("run", "execute on the reference interpreter");
    add_run_flags(oracleRunCmd);
    CLI::App* fuzzCmd = oracleCmd->add_subcommand("fuzz", "compare both interpreters on generated models");
    fuzzCmd->add_option("--seeds", seeds, "number of seeds (1..N)");
    fuzzCmd->add_option("--size", size, "rewrite steps per generated model");

    CLI::App* measureCmd = app.add_subcommand("measure", "evaluate measures over event logs");
    measureCmd->add_option("--model", modelPath, "model document")->required();
    measureCmd->add_option("--trace", tracePath, "a single event log");
    measureCmd->add_option("--runs", runsDir, "directory of .log files, one per run");
    measureCmd->add_option("--format", format, "table, csv or json-lines")
        ->check(CLI::IsMember({"table", "csv", "json-lines"}));

    CLI::App* transformCmd = app.add_subcommand("transform", "produce the BPMN-subset model");
    transformCmd->add_option("--model", modelPath, "model document")->required();
    transformCmd->add_option("--out", outPath, "output document")->required();
    transformCmd->add_option("--trace", tracePath, "write the trace map here");

    CLI::App* traceCheckCmd =
        app.add_subcommand("trace-check", "verify trace totality and skeleton equivalence");
    traceCheckCmd->add_option("--model", modelPath, "source model document")->required();
    traceCheckCmd->add_option("--bpmn", bpmnPath, "transformed document")->required();
    traceCheckCmd->add_option("--trace", tracePath, "trace map file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for the command grammar\n";
        return kUsage;
    }

    try {
        if (validateCmd->parsed()) return cmd_validate(modelPath);
        if (compileCmd->parsed()) return cmd_compile(modelPath, dumpPaths);
        if (runCmd->parsed())
            return cmd_run(false, modelPath, inputsPath, signalsPath, maxTicks, tracePath);
        if (oracleRunCmd->parsed())
            return cmd_run(true, modelPath, inputsPath, signalsPath, maxTicks, tracePath);
        if (fuzzCmd->parsed()) return cmd_fuzz(seeds, size);
        if (measureCmd->parsed()) return cmd_measure(modelPath, tracePath, runsDir, format);
        if (transformCmd->parsed()) return cmd_transform(modelPath, outPath, tracePath);
        if (traceCheckCmd->parsed()) return cmd_trace_check(modelPath, bpmnPath, tracePath);
    } catch (const ExitWith& e) {
        return e.code;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kRunFailure;
    }
    return kUsage;
}
