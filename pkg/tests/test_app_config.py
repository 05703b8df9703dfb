import pytest

from config.app_config import load_settings


@pytest.fixture
def clean_environment(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for name in ("DHEOM_THREADS", "LOG_DIR", "DHEOM_LOG_LEVEL", "DHEOM_ALLOW_UNSOUND_TRUNCATION"):
        # set first so teardown also removes values loaded from .env
        monkeypatch.setenv(name, "")
        monkeypatch.delenv(name)
    return monkeypatch


def test_defaults(clean_environment):
    settings = load_settings()
    assert settings.threads is None
    assert settings.log_dir is None
    assert settings.log_level == "INFO"
    assert not settings.allow_unsound_truncation


def test_environment_values(clean_environment):
    clean_environment.setenv("DHEOM_THREADS", "3")
    clean_environment.setenv("DHEOM_LOG_LEVEL", "debug")
    clean_environment.setenv("DHEOM_ALLOW_UNSOUND_TRUNCATION", " Yes ")
    settings = load_settings()
    assert settings.threads == 3
    assert settings.log_level == "DEBUG"
    assert settings.allow_unsound_truncation


def test_bad_thread_count_is_logged_and_ignored(clean_environment, caplog, capsys):
    clean_environment.setenv("DHEOM_THREADS", "many")
    with caplog.at_level("WARNING", logger="app_config"):
        assert load_settings().threads is None
    assert "DHEOM_THREADS='many' is not an integer" in caplog.text
    assert capsys.readouterr().out == ""


def test_dotenv_file_is_read(clean_environment, tmp_path):
    (tmp_path / ".env").write_text("DHEOM_THREADS=2\n", encoding="utf-8")
    assert load_settings().threads == 2
