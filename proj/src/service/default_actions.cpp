#include "intentflow/service/default_actions.hpp"

namespace intentflow::service {

namespace {

// Seed pool written to <data>/actions on first start.
constexpr const char* kDefaults = R"json([
  {"id": "check_people_in_images", "name": "check_people_in_images",
   "description": "Check images for people and mark O if a person is present and X if not",
   "parameter_schema": [{"label": "images", "kind": "table", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "person_detection_stub"}},
  {"id": "compose_document", "name": "compose_document",
   "description": "Compose a document from a table or text using a template",
   "parameter_schema": [{"label": "content", "kind": "table", "required": true},
                        {"label": "template", "kind": "text", "required": false}],
   "executor_kind": "builtin", "executor_config": {"builtin": "compose_document"}},
  {"id": "convert_pdf", "name": "convert_pdf",
   "description": "Convert a PDF document into plain text",
   "parameter_schema": [{"label": "document", "kind": "file", "required": true}],
   "executor_kind": "shell-out", "executor_config": {"command": "pdftotext {document} -"}},
  {"id": "create_event", "name": "create_event",
   "description": "Create a calendar event with a title and a date",
   "parameter_schema": [{"label": "title", "kind": "text", "required": true},
                        {"label": "date", "kind": "text", "required": true}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/calendar/events"}},
  {"id": "detect_faces", "name": "detect_faces",
   "description": "Detect faces in images and return their bounding boxes",
   "parameter_schema": [{"label": "images", "kind": "file", "required": true}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/vision/faces"}},
  {"id": "download_file", "name": "download_file",
   "description": "Download the results as a file",
   "parameter_schema": [{"label": "content", "kind": "file", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "download"}},
  {"id": "echo_text", "name": "echo_text",
   "description": "Echo the given text back unchanged",
   "parameter_schema": [{"label": "text", "kind": "text", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "echo"}},
  {"id": "fetch_url", "name": "fetch_url",
   "description": "Fetch a web page or file from a URL and store it as a file",
   "parameter_schema": [{"label": "url", "kind": "url", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "fetch_url"}},
  {"id": "filter_table", "name": "filter_table",
   "description": "Filter the rows of a table that match a condition",
   "parameter_schema": [{"label": "table", "kind": "table", "required": true},
                        {"label": "condition", "kind": "text", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "filter_table"}},
  {"id": "post_message", "name": "post_message",
   "description": "Post a message to a chat channel",
   "parameter_schema": [{"label": "message", "kind": "text", "required": true},
                        {"label": "channel", "kind": "text", "required": false}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/chat/messages"}},
  {"id": "purchase_item", "name": "purchase_item",
   "description": "Purchase an item such as a book from an online store",
   "parameter_schema": [{"label": "item", "kind": "text", "required": true},
                        {"label": "purchase platform", "kind": "url", "required": false}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/store/orders"}},
  {"id": "read_table", "name": "read_table",
   "description": "Read a table of records from a CSV or Excel spreadsheet file",
   "parameter_schema": [{"label": "file", "kind": "file", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "read_table"}},
  {"id": "resize_images", "name": "resize_images",
   "description": "Resize images to a given width",
   "parameter_schema": [{"label": "images", "kind": "file", "required": true},
                        {"label": "width", "kind": "text", "required": true}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/vision/resize"}},
  {"id": "review_images", "name": "review_images",
   "description": "Review uploaded images by reading the image links listed in a spreadsheet or website URL",
   "parameter_schema": [{"label": "image list", "kind": "file", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "read_table"}},
  {"id": "search_web", "name": "search_web",
   "description": "Search the web for information about a topic",
   "parameter_schema": [{"label": "query", "kind": "text", "required": true},
                        {"label": "search engine", "kind": "url", "required": false}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/search"}},
  {"id": "send_email", "name": "send_email",
   "description": "Send an email message with the results attached",
   "parameter_schema": [{"label": "attachment", "kind": "file", "required": true},
                        {"label": "recipient", "kind": "text", "required": false},
                        {"label": "subject", "kind": "text", "required": false}],
   "executor_kind": "builtin", "executor_config": {"builtin": "send_email"}},
  {"id": "summarize_content", "name": "summarize_content",
   "description": "Summarize recorded content such as a transcript into meeting minutes",
   "parameter_schema": [{"label": "content", "kind": "text", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "summarize"}},
  {"id": "transcribe_audio", "name": "transcribe_audio",
   "description": "Transcribe an audio recording into text",
   "parameter_schema": [{"label": "recording", "kind": "file", "required": true}],
   "executor_kind": "shell-out", "executor_config": {"command": "transcribe {recording}"}},
  {"id": "translate_text", "name": "translate_text",
   "description": "Translate text into a target language",
   "parameter_schema": [{"label": "text", "kind": "text", "required": true},
                        {"label": "target language", "kind": "text", "required": true}],
   "executor_kind": "builtin", "executor_config": {"builtin": "translate"}},
  {"id": "upload_file", "name": "upload_file",
   "description": "Upload a file to cloud storage",
   "parameter_schema": [{"label": "file", "kind": "file", "required": true}],
   "executor_kind": "http_api", "executor_config": {"endpoint": "http://127.0.0.1:9/storage/files"}}
])json";

}  // namespace

std::vector<actions::ActionDescriptor> default_actions() {
  std::vector<actions::ActionDescriptor> out;
  for (const auto& m : nlohmann::json::parse(kDefaults)) out.push_back(actions::from_manifest(m));
  return out;
}

}  // namespace intentflow::service
