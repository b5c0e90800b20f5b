#pragma once

// JSON HTTP API over a single profile.

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "persona/config.h"
#include "persona/errors.h"
#include "persona/profile_model.h"
#include "persona/provider.h"

namespace persona {

// A second writer gave up waiting for the profile lock.
class WriterBusyError : public Error {
 public:
  using Error::Error;
};

// Holds the published profile. Readers take an immutable snapshot; writers
// are serialized, persist the new profile and only then publish it.
class ProfileStore {
 public:
  ProfileStore(std::filesystem::path path, Profile initial, std::chrono::milliseconds writer_timeout);

  std::shared_ptr<const Profile> snapshot() const;

  // fn edits a private copy. On success the copy is saved and published; if
  // fn or the save throws, nothing changes. Throws WriterBusyError when the
  // lock is not acquired within the timeout.
  void mutate(const std::function<void(Profile&)>& fn);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::chrono::milliseconds writer_timeout_;
  mutable std::mutex publish_mutex_;
  std::shared_ptr<const Profile> current_;
  std::timed_mutex writer_mutex_;
};

// Counts, top keywords, top topics and WOB band sizes.
nlohmann::json profile_summary(const Profile& profile);

class Service {
 public:
  // Loads or creates the profile at config.profile_path. When provider is
  // null it is built from config.provider.
  explicit Service(ServiceConfig config, std::unique_ptr<SearchProvider> provider = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds config.listen, or an ephemeral port when the configured port is 0.
  // Returns the bound port.
  int bind();
  // Blocks serving requests until stop().
  void serve();
  void stop();
  void wait_until_ready() const;

  ProfileStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace persona
