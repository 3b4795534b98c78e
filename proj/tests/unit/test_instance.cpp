#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hubopt/instance.hpp"
#include "support/toy_hub.hpp"

using namespace hubopt;

namespace {

nlohmann::json bundled_doc() {
    std::ifstream in(bundled_instance_path());
    return nlohmann::json::parse(in);
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

std::string load_error(const nlohmann::json& doc) {
    try {
        parse_instance(doc.dump());
    } catch (const InstanceError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("bundled instance carries the published parameter table") {
    const HubInstance inst = load_instance(bundled_instance_path());
    CHECK(validate(inst).empty());
    CHECK(inst.time.periods_per_year == 48);
    CHECK(inst.time.years == std::vector<int>{2025});

    const auto* ely = inst.find_tech(TechKind::kElectrolyzer);
    REQUIRE(ely);
    CHECK(ely->max_input(0) == 300.0);
    CHECK(ely->efficiency == 0.75);

    const auto* h2 = inst.find_storage(Carrier::kHydrogen);
    REQUIRE(h2);
    CHECK(h2->max_at(0) == 2000.0);
    CHECK(h2->min_at(0) == 200.0);
    CHECK(h2->eta_ch == 0.95);
    CHECK(h2->eta_dch == 0.95);
    CHECK(h2->p_ch_max == 200.0);
    CHECK(h2->p_dch_max == 200.0);

    CHECK(inst.policy.tax_base_per_t == 80.0);
    CHECK(inst.policy.tax_escalation_per_t_per_year == 15.0);
    CHECK(inst.policy.tax_cap_per_t == 170.0);
    CHECK(inst.policy.nz_target_year == 2050);
    CHECK(inst.robust.dev_fraction == 0.30);
}

TEST_CASE("long-horizon instance follows the capacity trajectory") {
    const HubInstance inst = load_instance(bundled_instance_path("synthetic_on_2050.json"));
    CHECK(validate(inst).empty());
    const auto* ely = inst.find_tech(TechKind::kElectrolyzer);
    const auto* h2 = inst.find_storage(Carrier::kHydrogen);
    REQUIRE(ely);
    REQUIRE(h2);
    const size_t last = inst.time.num_years() - 1;
    CHECK(inst.time.years.front() == 2025);
    CHECK(inst.time.years.back() == 2050);
    CHECK(ely->max_input(0) == 300.0);
    CHECK(ely->max_input(last) == 3800.0);
    CHECK(h2->max_at(0) == 2000.0);
    CHECK(h2->max_at(last) == 37000.0);
}

TEST_CASE("storage efficiency above one is rejected with the field named") {
    auto doc = bundled_doc();
    for (auto& s : doc["storages"])
        if (s["carrier"] == "hydrogen") s["eta_ch"] = 1.2;
    const std::string msg = load_error(doc);
    CHECK(msg.find("eta_ch out of (0,1]") != std::string::npos);
}

TEST_CASE("missing demand series names the field") {
    auto doc = bundled_doc();
    doc["demands"].erase("hv_MWh");
    const std::string msg = load_error(doc);
    CHECK(msg.find("hv_MWh") != std::string::npos);
}

TEST_CASE("short series is a coverage violation at the right year") {
    auto doc = bundled_doc();
    doc["demands"]["electricity_MWh"][0].erase(0);
    const std::string msg = load_error(doc);
    CHECK(msg.find("SeriesCoverage") != std::string::npos);
    CHECK(msg.find("electricity_MWh[2025]") != std::string::npos);
}

TEST_CASE("malformed text and wrong schema are parse errors") {
    CHECK_THROWS_AS(parse_instance("{ not json"), InstanceError);
    auto doc = bundled_doc();
    doc["schema"] = "hubopt/0";
    CHECK(load_error(doc).find("schema") != std::string::npos);
    CHECK_THROWS_AS(load_instance("/nonexistent/instance.json"), InstanceError);
}

TEST_CASE("validate reports machine-readable codes") {
    HubInstance inst = testing::toy_hub();
    REQUIRE(validate(inst).empty());

    SUBCASE("inverted storage bounds") {
        auto& h2 = const_cast<StorageTech&>(*inst.find_storage(Carrier::kHydrogen));
        h2.e_min = 300.0;
        h2.e_max = 200.0;
        const auto v = validate(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == "StorageBoundsInverted");
    }
    SUBCASE("minimum shares above one") {
        inst.segments[0].min_share = 0.7;
        GridSegment extra;
        extra.name = "nuclear";
        extra.max_purchase_MW = 10.0;
        extra.min_share = 0.5;
        inst.segments.push_back(extra);
        const auto v = validate(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == "GridShareOverflow");
    }
    SUBCASE("odd period count") {
        inst.time.periods_per_year = 3;
        CHECK(has_code(validate(inst), "PeriodsInvalid"));
    }
    SUBCASE("years must increase") {
        inst.time.years = {2030, 2025};
        CHECK(has_code(validate(inst), "YearsNotIncreasing"));
    }
    SUBCASE("chp efficiencies summing past one") {
        ConversionTech chp;
        chp.kind = TechKind::kChp;
        chp.eta_e = 0.6;
        chp.eta_h = 0.5;
        inst.techs.push_back(chp);
        CHECK(has_code(validate(inst), "ChpEfficiencySum"));
    }
    SUBCASE("two electrolyzers") {
        inst.techs.push_back(inst.techs.front());
        CHECK(has_code(validate(inst), "ElectrolyzerCount"));
    }
    SUBCASE("two boilers") {
        ConversionTech boiler;
        boiler.kind = TechKind::kBoiler;
        inst.techs.push_back(boiler);
        inst.techs.push_back(boiler);
        CHECK(has_code(validate(inst), "TechDuplicate"));
    }
    SUBCASE("hydrogen store missing") {
        inst.storages.pop_back();
        CHECK(has_code(validate(inst), "StorageMissing"));
    }
    SUBCASE("negative demand") {
        inst.demands.heat_MWh[0][1] = -1.0;
        const auto v = validate(inst);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == "NegativeValue");
        CHECK(v[0].message.find("heat_MWh[2025,2]") != std::string::npos);
    }
    SUBCASE("dr ratio above one") {
        inst.demands.dr_up_ratio_h = 1.5;
        CHECK(has_code(validate(inst), "DrRatioOutOfRange"));
    }
    SUBCASE("tax base above cap") {
        inst.policy.tax_base_per_t = 200.0;
        CHECK(has_code(validate(inst), "TaxScheduleInvalid"));
    }
    SUBCASE("non-positive net-zero reference") {
        inst.policy.mode = PolicyMode::kNetZero;
        inst.policy.nz_base_emissions_t = 0.0;
        CHECK(has_code(validate(inst), "NetZeroBaseInvalid"));
    }
}

TEST_CASE("validate is deterministic and order-stable") {
    HubInstance inst = testing::toy_hub();
    inst.time.periods_per_year = 3;
    inst.demands.dr_up_ratio_el = -0.1;
    inst.export_limit_MW = -5.0;
    const auto a = validate(inst);
    const auto b = validate(inst);
    CHECK(a == b);
    REQUIRE(a.size() >= 3);
    CHECK(a.front().code == "PeriodsInvalid");
}

TEST_CASE("save then load is the identity on the validated fields") {
    const HubInstance inst = load_instance(bundled_instance_path());
    const auto path = std::filesystem::temp_directory_path() / "hubopt_roundtrip.json";
    save_instance(inst, path.string());
    const HubInstance back = load_instance(path.string());
    std::filesystem::remove(path);
    CHECK(to_json(back) == to_json(inst));
    CHECK(to_json(inst) == bundled_doc());
}

TEST_CASE("policy spellings") {
    CHECK(policy_mode_from_string("carbon-tax") == PolicyMode::kCarbonTax);
    CHECK(policy_mode_from_string("carbon_tax") == PolicyMode::kCarbonTax);
    CHECK(policy_mode_from_string("net-zero") == PolicyMode::kNetZero);
    CHECK(policy_mode_from_string("none") == PolicyMode::kNone);
    CHECK_FALSE(policy_mode_from_string("cap-and-trade").has_value());
}
