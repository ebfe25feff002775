// Small helpers for building input files inside tests.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fixture {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const char* kCitiesHeader = "city_id,name,state,region,is_capital\n";
inline const char* kFirmsHeader = "firm_id,city_id,is_public_admin\n";
inline const char* kTxHeader = "date,payer_firm,payee_firm,amount_cents\n";
inline const char* kCovHeader =
    "city_id,year,gdp_cents,exports_over_gdp,credit_over_gdp,gini,hdi,backlog,expenditures_cents,"
    "completed_cases,credit_agri_cents,credit_manu_cents,credit_serv_cents,jobs_manu,jobs_constr,"
    "jobs_trade,jobs_serv,jobs_agri\n";

// Three cities in two regions, four firms (firm 4 is public administration).
inline void write_small_directories(const std::filesystem::path& dir) {
    write_text(dir / "cities.csv", std::string(kCitiesHeader) +
                                       "1,Alpha,AA,North,1\n"
                                       "2,Beta,AA,North,0\n"
                                       "3,\"Gamma, City\",BB,South,1\n");
    write_text(dir / "firms.csv", std::string(kFirmsHeader) +
                                      "10,1,0\n"
                                      "11,1,0\n"
                                      "20,2,0\n"
                                      "30,3,0\n"
                                      "40,3,1\n");
}

}  // namespace fixture
