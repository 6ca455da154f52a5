#include "scenalloc/report.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::cli {

namespace {

using nlohmann::json;

const char* kMetrics[] = {"annualized_return", "cvar_ex_post", "hh_index",
                          "rotation",          "expense_bp",   "net_return"};

std::vector<std::string> strategy_order(const json& table) {
    std::vector<std::string> preferred{"Gw/oF", "GwF", "Hw/oF", "HwF", "EW"};
    std::vector<std::string> out;
    const json& row = table.at(0);
    for (const auto& name : preferred)
        if (row.contains(name)) out.push_back(name);
    for (auto it = row.begin(); it != row.end(); ++it)
        if (it.key() != "lambda" && std::find(out.begin(), out.end(), it.key()) == out.end())
            out.push_back(it.key());
    return out;
}

}  // namespace

std::string write_report(const std::string& backtest_dir, const std::string& out_dir,
                         const std::vector<std::string>& comments) {
    namespace fs = std::filesystem;
    fs::path summary_path = fs::path(backtest_dir) / "summary.json";
    if (!fs::exists(summary_path))
        throw Error(ErrorKind::Io, strfmt("missing input: %s", summary_path.string().c_str()));
    json summary;
    try {
        summary = json::parse(read_text_file(summary_path.string()));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Data, strfmt("%s: %s", summary_path.string().c_str(), e.what()));
    }
    fs::create_directories(out_dir);

    std::ostringstream text;
    text << "Backtest report (" << summary.at("runs").get<int>() << " runs per cell, "
         << summary.at("rebalance_dates").size() << " rebalances)\n";

    for (const char* metric : kMetrics) {
        const json& table = summary.at("tables").at(metric);
        auto strategies = strategy_order(table);

        std::vector<std::string> header{"lambda"};
        for (const auto& s : strategies) header.push_back(s);
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : table) {
            std::vector<std::string> cells{fmt_double(row.at("lambda").get<double>())};
            for (const auto& s : strategies) cells.push_back(fmt_double(row.at(s).at("mean").get<double>()));
            rows.push_back(std::move(cells));
        }
        write_csv((fs::path(out_dir) / (std::string(metric) + ".csv")).string(), comments, header, rows);

        text << "\n" << metric << "\n";
        text << strfmt("%8s", "lambda");
        for (const auto& s : strategies) text << strfmt("%12s", s.c_str());
        text << "\n";
        for (const auto& row : table) {
            text << strfmt("%8.3f", row.at("lambda").get<double>());
            for (const auto& s : strategies) text << strfmt("%12.4f", row.at(s).at("mean").get<double>());
            text << "\n";
        }
    }

    std::string out = text.str();
    write_text_file((fs::path(out_dir) / "report.txt").string(), out);
    return out;
}

}  // namespace scenalloc::cli
