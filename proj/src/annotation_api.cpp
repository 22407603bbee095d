#include <chatterbox/annotation_api.hpp>
#include <chatterbox/errors.hpp>

namespace chatterbox::api {

using nlohmann::json;

namespace {

ApiResponse err(int status, const std::string& code, const std::string& detail) {
  return {status, {{"error", code}, {"detail", detail}}};
}

json message_view(const Message& m) {
  json j = {{"index", m.index},
            {"platform", std::string(platform_code(m.platform))},
            {"platform_name", std::string(display_name(m.platform))},
            {"role", std::string(to_string(m.role))},
            {"at", format_utc(m.at)},
            {"at_local", m.at_local},
            {"text", m.text},
            {"origin", m.origin}};
  if (m.media) j["media"] = to_json(*m.media);
  if (m.sent_asset) j["sent_asset"] = *m.sent_asset;
  if (!m.detections.empty()) {
    j["detections"] = json::array();
    for (const auto& d : m.detections) j["detections"].push_back(to_json(d));
  }
  return j;
}

}  // namespace

ApiResponse error_response() {
  try {
    throw;
  } catch (const Conflict& e) {
    return err(409, "conflict", e.what());
  } catch (const NotFound& e) {
    return err(404, "not_found", e.what());
  } catch (const SerializationError& e) {
    return err(422, "serialization", e.what());
  } catch (const StateError& e) {
    return err(422, "state", e.what());
  } catch (const ParseError& e) {
    return err(400, "bad_request", e.what());
  } catch (const ConfigError& e) {
    return err(400, "bad_request", e.what());
  } catch (const json::exception& e) {
    return err(400, "bad_request", e.what());
  } catch (const BackendUnavailable& e) {
    return err(503, "backend_unavailable", e.what());
  } catch (const ValidationExhausted& e) {
    return err(502, "validation_exhausted", e.what());
  } catch (const std::exception& e) {
    return err(500, "internal", e.what());
  }
}

ApiResponse AnnotationService::health() const {
  return {200, {{"status", "ok"}, {"threads", hp_.threads().size()}}};
}

ApiResponse AnnotationService::list_triage() const {
  return guarded([&] {
    json rows = json::array();
    for (const auto& r : hp_.list_triage()) rows.push_back(to_json(r));
    return ApiResponse{200, {{"rows", rows}, {"openers", hp_.options().openers}}};
  });
}

ApiResponse AnnotationService::triage_act(const json& body) {
  return guarded([&] {
    if (!body.is_object() || !body.contains("actions") || !body.at("actions").is_array())
      throw ParseError("actions", "expected an array");
    const auto annotator = body.value("annotator_id", std::string{});
    if (annotator.empty()) throw ParseError("annotator_id", "missing");
    std::vector<TriageDecision> batch;
    for (std::size_t i = 0; i < body.at("actions").size(); ++i) {
      const auto& a = body.at("actions")[i];
      const auto field = "actions[" + std::to_string(i) + "]";
      if (!a.is_object() || !a.contains("thread_id") || !a.contains("verb"))
        throw ParseError(field, "expected {thread_id, verb}");
      TriageDecision d;
      d.thread_id = a.at("thread_id").get<std::string>();
      const auto verb = a.at("verb").get<std::string>();
      if (verb != "ignore" && verb != "interact") throw ParseError(field + ".verb", "must be ignore or interact");
      d.interact = verb == "interact";
      d.opener_index = a.value("opener_index", 0);
      d.annotator_id = annotator;
      if (a.contains("expected_version")) d.expected_version = a.at("expected_version").get<std::uint64_t>();
      batch.push_back(std::move(d));
    }
    json results = json::array();
    for (const auto& r : hp_.triage_act(batch)) results.push_back(to_json(r));
    return ApiResponse{200, {{"results", results}}};
  });
}

ApiResponse AnnotationService::list_conversations(const std::optional<std::string>& platform) const {
  return guarded([&] {
    std::optional<PlatformId> filter;
    if (platform && !platform->empty()) filter = parse_platform(*platform);
    json rows = json::array();
    for (const auto& s : hp_.list_conversations(filter)) rows.push_back(to_json(s));
    return ApiResponse{200, {{"conversations", rows}}};
  });
}

ApiResponse AnnotationService::conversation_view(const std::string& thread_id) const {
  return guarded([&] {
    const auto t = hp_.thread(thread_id);
    const auto& p = hp_.persona(t.persona_id);
    json msgs = json::array();
    for (const Message* m : t.history()) msgs.push_back(message_view(*m));
    json platforms = json::array();
    for (const auto& seg : t.segments)
      platforms.push_back({{"platform", std::string(platform_code(seg.platform))},
                           {"platform_name", std::string(display_name(seg.platform))},
                           {"dormant", seg.dormant}});
    json pending = nullptr;
    if (t.pending_migration)
      pending = {{"kind", "migration"},
                 {"item_id", t.pending_migration->item_id},
                 {"scammer_number", t.pending_migration->scammer_number}};
    else if (t.pending_selfie_item)
      pending = {{"kind", "selfie"}, {"item_id", *t.pending_selfie_item}, {"selfie_pool", p.selfie_assets}};
    json audit = json::array();
    for (const auto& e : hp_.audit_log())
      if (e.value("thread_id", std::string{}) == thread_id) audit.push_back(e);
    json queued = json::array();
    for (const auto& q : hp_.queue_items())
      if (q.thread_id == thread_id && q.open()) queued.push_back(queue::to_json(q));
    json doc = {{"thread_id", t.thread_id},
                {"persona_id", t.persona_id},
                {"persona_name", p.full_name()},
                {"state", std::string(to_string(t.state))},
                {"version", t.version},
                {"segments", platforms},
                {"messages", msgs},
                {"pending", pending},
                {"queued", queued},
                {"needs_review", hp_.needs_review(thread_id)},
                {"checkpoint_pending", t.checkpoint_pending},
                {"next_checkpoint_in",
                 std::max(0, hp_.options().checkpoint_every - t.scammer_msgs_since_review)},
                {"sender", to_json(t.sender)},
                {"audit", audit}};
    if (t.migration) doc["migration"] = to_json(*t.migration);
    if (!t.halt_reason.empty()) doc["halt_reason"] = t.halt_reason;
    return ApiResponse{200, doc};
  });
}

ApiResponse AnnotationService::act(const std::string& thread_id, const json& body) {
  return guarded([&] {
    auto doc = body;
    if (!doc.is_object()) throw ParseError("body", "expected an object");
    doc["thread_id"] = thread_id;
    auto a = annotator_action_from_json(doc);
    return ApiResponse{200, to_json(hp_.act(a))};
  });
}

ApiResponse AnnotationService::candidates(const std::string& thread_id, std::optional<int> k,
                                          const std::string& annotator_id) {
  return guarded([&] {
    json out = json::array();
    int rank = 1;
    for (const auto& c : hp_.candidates(thread_id, k.value_or(hp_.options().candidates_k), annotator_id))
      out.push_back({{"rank", rank++}, {"text", c.text}, {"attempt", c.attempt}});
    return ApiResponse{200, {{"thread_id", thread_id}, {"candidates", out}}};
  });
}

}  // namespace chatterbox::api
