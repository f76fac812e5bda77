#include "sbsim_cli/app.hpp"

#include "sbsim_cli/commands.hpp"
#include "sbsim_cli/config.hpp"
#include "sbsim_cli/csv.hpp"

#include <sbsim/errors.hpp>
#include <sbsim/spectral.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <sstream>
#include <thread>

#ifndef SBSIM_VERSION
#define SBSIM_VERSION "unknown"
#endif

namespace sbsim::cli {

namespace {

struct Point {
    std::vector<double> coords;  // one per sweep, same order as RunOptions::sweeps
    json document;
    ParseLog log;
    std::optional<RunConfig> config;
    std::filesystem::path dir;
};

int report(std::exception_ptr ep, std::ostream& err) {
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << '\n';
        return exit_cap;
    } catch (const spectral::FitError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (...) {
        err << "error: unknown failure\n";
        return exit_io;
    }
}

std::vector<Point> expand(const json& base, const std::vector<Sweep>& sweeps) {
    std::vector<Point> points(1);
    points[0].document = base;
    for (const auto& s : sweeps) {
        std::vector<Point> next;
        for (const auto& p : points) {
            for (double v : s.values) {
                Point q;
                q.coords = p.coords;
                q.coords.push_back(v);
                q.document = p.document;
                set_path(q.document, s.key, v);
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }
    return points;
}

// Returns false if --strict-regime rejects the point.
bool regime_gate(const RunConfig& config, bool strict, const std::string& where, std::ostream& err) {
    for (const auto& [label, rep] : regime_reports(config)) {
        for (const auto& item : rep.items) {
            if (item.verdict == iontrap::Verdict::pass) continue;
            const std::string msg = where + label + ": " + item.name + " = " + format_number(item.ratio) + " (" +
                                    item.rule + ")";
            if (strict && item.verdict == iontrap::Verdict::fail) {
                err << "error: regime check failed: " << msg << '\n';
                return false;
            }
            err << "warning: regime " << iontrap::to_string(item.verdict) << ": " << msg << '\n';
        }
    }
    return true;
}

std::vector<std::string> comment_block(const json& document, std::size_t threads) {
    return {"sbsim_version=" + version(), "config_fnv1a=" + hex64(fnv1a(document.dump())),
            "threads=" + std::to_string(threads)};
}

}  // namespace

std::string version() { return SBSIM_VERSION; }

Sweep parse_sweep(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw ConfigError({"--sweep '" + spec + "': expected key=v1,v2,..."});
    }
    Sweep s;
    s.key = spec.substr(0, eq);
    std::size_t start = eq + 1;
    while (start <= spec.size()) {
        const auto comma = std::min(spec.find(',', start), spec.size());
        const std::string item = spec.substr(start, comma - start);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw ConfigError({"--sweep " + s.key + ": '" + item + "' is not a number"});
        }
        s.values.push_back(v);
        start = comma + 1;
    }
    std::sort(s.values.begin(), s.values.end());
    s.values.erase(std::unique(s.values.begin(), s.values.end()), s.values.end());
    return s;
}

int run(const std::string& subcommand, const std::filesystem::path& config_path, const RunOptions& opts,
        std::ostream& out, std::ostream& err) {
    const std::size_t threads = std::max<std::size_t>(1, opts.threads);
    std::vector<Point> points;
    try {
        const json base = load_json(config_path);
        points = expand(base, opts.sweeps);
        const bool swept = !opts.sweeps.empty();
        for (std::size_t k = 0; k < points.size(); ++k) {
            auto& p = points[k];
            const std::string where = swept ? "sweep_" + std::to_string(k) + ": " : "";
            try {
                p.config = parse_config(subcommand, p.document, p.log);
            } catch (const ConfigError& e) {
                std::vector<std::string> issues;
                for (const auto& i : e.issues()) issues.push_back(where + i);
                throw ConfigError(issues);
            }
            if (!regime_gate(*p.config, opts.strict_regime, where, err)) return exit_config;
            p.dir = swept ? opts.out_dir / ("sweep_" + std::to_string(k)) : opts.out_dir;
        }

        if (opts.dry_run) {
            for (std::size_t k = 0; k < points.size(); ++k) {
                if (swept) out << "[sweep_" << k << "]\n";
                for (const auto& [path, value] : points[k].log.resolved) out << path << " = " << value << '\n';
            }
            return exit_ok;
        }

        for (const auto& p : points) std::filesystem::create_directories(p.dir);

        if (!swept) {
            OutputContext ctx{points[0].dir, comment_block(points[0].document, threads), threads, opts.acknowledge_cap,
                              &out};
            execute(*points[0].config, ctx);
            return exit_ok;
        }

        Series index;
        std::vector<double> ids;
        for (std::size_t k = 0; k < points.size(); ++k) ids.push_back(static_cast<double>(k));
        index.add("sweep", std::move(ids));
        for (std::size_t s = 0; s < opts.sweeps.size(); ++s) {
            std::vector<double> col;
            for (const auto& p : points) col.push_back(p.coords[s]);
            index.add(opts.sweeps[s].key, std::move(col));
        }
        emit_csv(index, opts.out_dir / "sweep_index.csv", comment_block(points[0].document, threads));
    } catch (...) {
        return report(std::current_exception(), err);
    }

    // Sweep points run concurrently, one thread each; logs come out in point order.
    std::vector<std::ostringstream> logs(points.size());
    std::vector<std::exception_ptr> failures(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < points.size(); k = next++) {
            try {
                OutputContext ctx{points[k].dir, comment_block(points[k].document, 1), 1, opts.acknowledge_cap, &logs[k]};
                execute(*points[k].config, ctx);
            } catch (...) {
                failures[k] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < std::min(threads, points.size()); ++i) pool.emplace_back(worker);
    }
    int code = exit_ok;
    for (std::size_t k = 0; k < points.size(); ++k) {
        out << "[sweep_" << k << "]\n" << logs[k].str();
        if (failures[k]) {
            err << "sweep_" << k << ": ";
            const int c = report(failures[k], err);
            if (code == exit_ok) code = c;
        }
    }
    return code;
}

}  // namespace sbsim::cli
