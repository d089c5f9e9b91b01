#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>

namespace riskpipe {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

inline LogLevel log_level_from_string(const std::string& s) {
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    if (s == "warn") return LogLevel::warn;
    if (s == "error") return LogLevel::error;
    return LogLevel::info;
}

inline const char* log_level_name(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
    }
    return "info";
}

/// Line logger emitting "ISO8601 level stage message". Threshold comes from
/// RISKPIPE_LOG_LEVEL unless set explicitly. A default-constructed logger
/// writes to stderr only; attach_file() adds the run log file.
class Logger {
public:
    Logger() {
        if (const char* env = std::getenv("RISKPIPE_LOG_LEVEL"))
            threshold_ = log_level_from_string(env);
    }

    void set_threshold(LogLevel l) { threshold_ = l; }
    void set_console(bool on) { console_ = on; }

    void attach_file(const std::string& path) {
        file_.open(path, std::ios::out | std::ios::trunc);
    }

    void log(LogLevel level, const std::string& stage, const std::string& message) {
        if (level < threshold_) return;
        const std::string line = timestamp() + " " + log_level_name(level) + " " + stage + " " + message;
        if (file_.is_open()) file_ << line << "\n" << std::flush;
        if (console_) std::cerr << line << "\n";
    }

    void debug(const std::string& stage, const std::string& m) { log(LogLevel::debug, stage, m); }
    void info(const std::string& stage, const std::string& m) { log(LogLevel::info, stage, m); }
    void warn(const std::string& stage, const std::string& m) { log(LogLevel::warn, stage, m); }
    void error(const std::string& stage, const std::string& m) { log(LogLevel::error, stage, m); }

private:
    static std::string timestamp() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
#if defined(_WIN32)
        gmtime_s(&tm, &t);
#else
        gmtime_r(&t, &tm);
#endif
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                      tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
        return buf;
    }

    LogLevel threshold_ = LogLevel::info;
    bool console_ = true;
    std::ofstream file_;
};

}  // namespace riskpipe
