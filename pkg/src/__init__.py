# Knowledge Base AI API - Source Package